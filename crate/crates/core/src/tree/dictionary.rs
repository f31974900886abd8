//! Per-domain predicate dictionaries.
//!
//! A dictionary maps every decision token to a threshold test on one
//! observation feature and every action token to an action index. Thresholds
//! are stored in human units (steps, metres, m/s); each feature carries the
//! scale that converts an observation value into those units.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TreeError;

pub const NONTERM: &str = "NONTERM";
pub const EOS: &str = "EOS";
pub const PAD: &str = "PAD";
pub const UNK: &str = "UNK";
pub const SPECIAL_TOKENS: [&str; 4] = [NONTERM, EOS, PAD, UNK];

/// Upper bound on decisions + actions + specials for a domain.
pub const MAX_TOKENS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Taxi,
    Highway,
}

impl Domain {
    pub const ALL: [Domain; 2] = [Domain::Taxi, Domain::Highway];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Taxi => "taxi",
            Domain::Highway => "highway",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "taxi" => Ok(Domain::Taxi),
            "highway" => Ok(Domain::Highway),
            other => Err(TreeError::UnknownDomain(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Greater,
    Less,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Greater => Direction::Less,
            Direction::Less => Direction::Greater,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Direction::Greater => ">",
            Direction::Less => "<",
        }
    }

    /// `+1` for greater, `-1` for less.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Greater => 1.0,
            Direction::Less => -1.0,
        }
    }

    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Direction::Greater => value > threshold,
            Direction::Less => value < threshold,
        }
    }
}

/// One observation slot. `human = observation * scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: &'static str,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionPredicate {
    pub token: &'static str,
    pub feature: usize,
    /// Threshold in human units.
    pub threshold: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionEntry {
    pub token: &'static str,
    pub index: usize,
}

/// What a token denotes inside a dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenRole {
    Decision,
    /// A bare feature name; usable as a decision only with a threshold annotation.
    Feature,
    Action,
    Special,
}

/// Result of mapping a (feature, direction, threshold) comparison onto a token.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalCondition {
    pub token: &'static str,
    /// True when the chosen token tests the opposite direction, so the
    /// branches of the comparison must be exchanged.
    pub swapped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateDictionary {
    pub domain: Domain,
    pub features: Vec<FeatureSpec>,
    pub decisions: Vec<DecisionPredicate>,
    pub actions: Vec<ActionEntry>,
}

fn feature(name: &'static str, scale: f64) -> FeatureSpec {
    FeatureSpec { name, scale }
}

fn decision(token: &'static str, feature: usize, threshold: f64, direction: Direction) -> DecisionPredicate {
    DecisionPredicate { token, feature, threshold, direction }
}

fn actions(tokens: &[&'static str]) -> Vec<ActionEntry> {
    tokens.iter().enumerate().map(|(index, &token)| ActionEntry { token, index }).collect()
}

impl PredicateDictionary {
    pub fn for_domain(domain: Domain) -> Self {
        match domain {
            Domain::Taxi => Self::taxi(),
            Domain::Highway => Self::highway(),
        }
    }

    /// Taxi observation: `[at airport, at city, at village, traffic, village wait / 10]`.
    pub fn taxi() -> Self {
        use Direction::*;
        Self {
            domain: Domain::Taxi,
            features: vec![
                feature("loc_airport", 1.0),
                feature("loc_city", 1.0),
                feature("loc_village", 1.0),
                feature("traffic", 1.0),
                feature("village_wait", 10.0),
            ],
            decisions: vec![
                decision("at_airport", 0, 0.5, Greater),
                decision("at_city", 1, 0.5, Greater),
                decision("at_village", 2, 0.5, Greater),
                decision("traffic_jam", 3, 0.5, Greater),
                decision("wait_gt_2", 4, 2.0, Greater),
                decision("wait_gt_5", 4, 5.0, Greater),
            ],
            actions: actions(&["drive_airport", "drive_city", "drive_village", "wait"]),
        }
    }

    /// Highway observation: ego `[y, speed]` followed by four car slots of
    /// `[dx, dy, dvx, dvy]` (ahead, left lane, right lane, nearest other).
    pub fn highway() -> Self {
        use Direction::*;
        let mut features = vec![feature("ego_y", 1.0), feature("ego_speed", 1.0)];
        features.extend(HIGHWAY_SLOT_FEATURES.iter().flatten().map(|&name| feature(name, 1.0)));
        Self {
            domain: Domain::Highway,
            features,
            decisions: vec![
                decision("car_ahead_close", 2, 15.0, Less),
                decision("car_left_close", 6, 10.0, Less),
                decision("car_right_close", 10, 10.0, Less),
                decision("in_left_lane", 0, 2.0, Less),
                decision("in_right_lane", 0, 6.0, Greater),
                decision("speed_high", 1, 25.0, Greater),
            ],
            actions: actions(&["lane_left", "idle", "lane_right", "faster", "slower"]),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.features.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn decision(&self, token: &str) -> Option<&DecisionPredicate> {
        self.decisions.iter().find(|d| d.token == token)
    }

    pub fn action_index(&self, token: &str) -> Option<usize> {
        self.actions.iter().find(|a| a.token == token).map(|a| a.index)
    }

    pub fn action_token(&self, index: usize) -> Option<&'static str> {
        self.actions.iter().find(|a| a.index == index).map(|a| a.token)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn role(&self, token: &str) -> Option<TokenRole> {
        if self.decision(token).is_some() {
            Some(TokenRole::Decision)
        } else if self.action_index(token).is_some() {
            Some(TokenRole::Action)
        } else if SPECIAL_TOKENS.contains(&token) {
            Some(TokenRole::Special)
        } else if self.feature_index(token).is_some() {
            Some(TokenRole::Feature)
        } else {
            None
        }
    }

    /// Decision tokens, actions, then specials.
    pub fn vocabulary(&self) -> Vec<&'static str> {
        self.decisions
            .iter()
            .map(|d| d.token)
            .chain(self.actions.iter().map(|a| a.token))
            .chain(SPECIAL_TOKENS)
            .collect()
    }

    /// Feature tested by a decision token or bare feature name, with the
    /// direction it tests and its default threshold (human units).
    pub fn condition_of(&self, token: &str) -> Option<(usize, Direction, Option<f64>)> {
        if let Some(d) = self.decision(token) {
            return Some((d.feature, d.direction, Some(d.threshold)));
        }
        self.feature_index(token).map(|f| (f, Direction::Greater, None))
    }

    /// Maps a comparison on a feature to the dictionary token that best names it.
    ///
    /// Preference order: nearest-threshold predicate on the same feature and
    /// direction, then nearest on the same feature with the opposite direction
    /// (branches swapped), then the bare feature name tested with `>`.
    /// Threshold ties resolve to dictionary order.
    pub fn canonical_condition(&self, feature: usize, direction: Direction, threshold: f64) -> CanonicalCondition {
        let nearest = |dir: Direction| {
            self.decisions
                .iter()
                .filter(|d| d.feature == feature && d.direction == dir)
                .fold(None::<&DecisionPredicate>, |best, d| match best {
                    Some(b) if (b.threshold - threshold).abs() <= (d.threshold - threshold).abs() => Some(b),
                    _ => Some(d),
                })
        };
        if let Some(d) = nearest(direction) {
            return CanonicalCondition { token: d.token, swapped: false };
        }
        if let Some(d) = nearest(direction.flipped()) {
            return CanonicalCondition { token: d.token, swapped: true };
        }
        CanonicalCondition {
            token: self.features[feature].name,
            swapped: direction == Direction::Less,
        }
    }

    /// Checks the dictionary's own invariants.
    pub fn check(&self) -> Result<(), TreeError> {
        let mut seen = HashSet::new();
        let all = self
            .decisions
            .iter()
            .map(|d| d.token)
            .chain(self.actions.iter().map(|a| a.token))
            .chain(SPECIAL_TOKENS)
            .chain(self.features.iter().map(|f| f.name));
        for token in all {
            if !seen.insert(token) {
                return Err(TreeError::InvalidDictionary(format!("duplicate token {token}")));
            }
        }
        for d in &self.decisions {
            if d.feature >= self.obs_dim() {
                return Err(TreeError::InvalidDictionary(format!("{} uses feature {} out of range", d.token, d.feature)));
            }
        }
        let mut indices: Vec<usize> = self.actions.iter().map(|a| a.index).collect();
        indices.sort_unstable();
        if indices != (0..self.actions.len()).collect::<Vec<_>>() {
            return Err(TreeError::InvalidDictionary("action indices are not contiguous".into()));
        }
        let total = self.decisions.len() + self.actions.len() + SPECIAL_TOKENS.len();
        if total > MAX_TOKENS {
            return Err(TreeError::InvalidDictionary(format!("{total} tokens exceeds {MAX_TOKENS}")));
        }
        if self.features.iter().any(|f| !(f.scale > 0.0)) {
            return Err(TreeError::InvalidDictionary("feature scale must be positive".into()));
        }
        Ok(())
    }
}

const HIGHWAY_SLOT_FEATURES: [[&str; 4]; 4] = [
    ["ahead_dx", "ahead_dy", "ahead_dvx", "ahead_dvy"],
    ["left_dx", "left_dy", "left_dvx", "left_dvy"],
    ["right_dx", "right_dy", "right_dvx", "right_dvy"],
    ["other_dx", "other_dy", "other_dvx", "other_dvy"],
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_dictionaries_are_consistent() {
        for domain in Domain::ALL {
            let dict = PredicateDictionary::for_domain(domain);
            dict.check().unwrap();
            assert!(dict.vocabulary().len() <= MAX_TOKENS);
        }
        assert_eq!(PredicateDictionary::taxi().obs_dim(), 5);
        assert_eq!(PredicateDictionary::highway().obs_dim(), 18);
        assert_eq!(PredicateDictionary::taxi().action_index("wait"), Some(3));
    }

    #[test]
    fn canonical_condition_prefers_nearest_same_direction() {
        let dict = PredicateDictionary::taxi();
        let c = dict.canonical_condition(4, Direction::Greater, 4.0);
        assert_eq!(c, CanonicalCondition { token: "wait_gt_5", swapped: false });
        let c = dict.canonical_condition(4, Direction::Greater, 3.5);
        assert_eq!(c.token, "wait_gt_2");
        let c = dict.canonical_condition(4, Direction::Less, 3.0);
        assert_eq!(c, CanonicalCondition { token: "wait_gt_2", swapped: true });
    }

    #[test]
    fn canonical_condition_falls_back_to_feature_name() {
        let dict = PredicateDictionary::highway();
        let c = dict.canonical_condition(4, Direction::Less, 1.0);
        assert_eq!(c, CanonicalCondition { token: "ahead_dvx", swapped: true });
        assert_eq!(dict.role("ahead_dvx"), Some(TokenRole::Feature));
    }

    #[test]
    fn duplicate_tokens_are_rejected() {
        let mut dict = PredicateDictionary::taxi();
        dict.actions.push(ActionEntry { token: "traffic_jam", index: 4 });
        assert!(dict.check().is_err());
    }
}
