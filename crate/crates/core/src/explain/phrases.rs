//! Per-domain phrase tables.
//!
//! Every entry lists its canonical phrasing first; the others are surface
//! variants used by the corpus generator.

use crate::tree::{Domain, PredicateDictionary, SPECIAL_TOKENS};

#[derive(Debug, Clone, PartialEq)]
pub struct PhraseTable {
    pub domain: Domain,
    /// Decision token -> clauses that read "If <clause>, ...".
    pub conditions: Vec<(&'static str, Vec<&'static str>)>,
    /// Action token -> imperative verb phrases.
    pub actions: Vec<(&'static str, Vec<&'static str>)>,
    /// Feature name -> noun phrase, used for learned thresholds.
    pub features: Vec<(&'static str, &'static str)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingPhrase(pub String);

impl PhraseTable {
    pub fn for_domain(domain: Domain) -> Self {
        match domain {
            Domain::Taxi => taxi(),
            Domain::Highway => highway(),
        }
    }

    pub fn condition(&self, token: &str) -> Result<&[&'static str], MissingPhrase> {
        lookup(&self.conditions, token)
    }

    pub fn action(&self, token: &str) -> Result<&[&'static str], MissingPhrase> {
        lookup(&self.actions, token)
    }

    pub fn feature(&self, name: &str) -> Result<&'static str, MissingPhrase> {
        self.features.iter().find(|(k, _)| *k == name).map(|(_, v)| *v).ok_or_else(|| MissingPhrase(name.to_string()))
    }

    /// Tokens without exactly one entry, plus entries for unknown tokens.
    pub fn completeness_problems(&self, dict: &PredicateDictionary) -> Vec<String> {
        let mut problems = Vec::new();
        let count = |list: &[(&str, Vec<&str>)], t: &str| list.iter().filter(|(k, _)| *k == t).count();
        for d in &dict.decisions {
            if count(&self.conditions, d.token) != 1 {
                problems.push(format!("condition `{}`", d.token));
            }
        }
        for a in &dict.actions {
            if count(&self.actions, a.token) != 1 {
                problems.push(format!("action `{}`", a.token));
            }
        }
        for f in &dict.features {
            if self.features.iter().filter(|(k, _)| *k == f.name).count() != 1 {
                problems.push(format!("feature `{}`", f.name));
            }
        }
        let known = dict.vocabulary();
        for (k, variants) in self.conditions.iter().chain(&self.actions) {
            if !known.contains(k) || SPECIAL_TOKENS.contains(k) {
                problems.push(format!("stray entry `{k}`"));
            }
            if variants.len() < 3 {
                problems.push(format!("`{k}` has fewer than 3 variants"));
            }
        }
        problems
    }
}

fn lookup<'a>(list: &'a [(&'static str, Vec<&'static str>)], token: &str) -> Result<&'a [&'static str], MissingPhrase> {
    list.iter().find(|(k, _)| *k == token).map(|(_, v)| v.as_slice()).ok_or_else(|| MissingPhrase(token.to_string()))
}

fn taxi() -> PhraseTable {
    PhraseTable {
        domain: Domain::Taxi,
        conditions: vec![
            ("at_airport", vec!["you are at the airport", "the taxi is at the airport", "you're at the airport", "the cab is parked at the airport"]),
            ("at_city", vec!["you are in the city", "the taxi is in the city", "you're in the city", "the cab is downtown in the city"]),
            ("at_village", vec!["you are at the village", "the taxi is at the village", "you're at the village", "the cab is out at the village"]),
            ("traffic_jam", vec!["there is a traffic jam", "traffic is heavy", "the roads are jammed with traffic", "there's a lot of traffic"]),
            (
                "wait_gt_2",
                vec![
                    "the village passenger is more than 2 minutes away",
                    "the wait at the village is longer than 2 minutes",
                    "the village pickup will take over 2 minutes",
                    "you would wait more than 2 minutes at the village",
                ],
            ),
            (
                "wait_gt_5",
                vec![
                    "the village passenger is more than 5 minutes away",
                    "the wait at the village is longer than 5 minutes",
                    "the village pickup will take over 5 minutes",
                    "you would wait more than 5 minutes at the village",
                ],
            ),
        ],
        actions: vec![
            ("drive_airport", vec!["drive to the airport", "head to the airport", "go to the airport", "take the road to the airport"]),
            ("drive_city", vec!["drive to the city", "head to the city", "go to the city", "take the road into the city"]),
            ("drive_village", vec!["drive to the village", "head to the village", "go to the village", "take the road to the village"]),
            ("wait", vec!["wait for a passenger", "stay and wait for a passenger", "wait there for a passenger", "hold on for a passenger"]),
        ],
        features: vec![
            ("loc_airport", "the airport indicator"),
            ("loc_city", "the city indicator"),
            ("loc_village", "the village indicator"),
            ("traffic", "the traffic level"),
            ("village_wait", "the village wait in minutes"),
        ],
    }
}

fn highway() -> PhraseTable {
    PhraseTable {
        domain: Domain::Highway,
        conditions: vec![
            ("car_ahead_close", vec!["a car is close ahead of you", "the car in front is close", "there is a car right ahead of you", "a vehicle is close in front of you"]),
            (
                "car_left_close",
                vec!["a car is close in the left lane", "the left lane has a car nearby", "there is a car close by on your left", "a vehicle is near you in the left lane"],
            ),
            (
                "car_right_close",
                vec!["a car is close in the right lane", "the right lane has a car nearby", "there is a car close by on your right", "a vehicle is near you in the right lane"],
            ),
            ("in_left_lane", vec!["you are in the left lane", "you're driving in the left lane", "your car is in the leftmost lane", "you are on the left side of the road"]),
            ("in_right_lane", vec!["you are in the right lane", "you're driving in the right lane", "your car is in the rightmost lane", "you are on the right side of the road"]),
            ("speed_high", vec!["your speed is high", "you are driving fast", "you're going fast", "your car is moving at a high speed"]),
        ],
        actions: vec![
            ("lane_left", vec!["change to the left lane", "move over to the left lane", "switch into the left lane", "merge left"]),
            ("idle", vec!["keep your lane and speed", "stay in your lane at the same speed", "keep going as you are", "hold your lane and speed"]),
            ("lane_right", vec!["change to the right lane", "move over to the right lane", "switch into the right lane", "merge right"]),
            ("faster", vec!["speed up", "accelerate", "drive faster", "increase your speed"]),
            ("slower", vec!["slow down", "brake", "drive slower", "reduce your speed"]),
        ],
        features: vec![
            ("ego_y", "your lateral position"),
            ("ego_speed", "your speed"),
            ("ahead_dx", "the gap to the car ahead"),
            ("ahead_dy", "the lateral offset of the car ahead"),
            ("ahead_dvx", "the relative speed of the car ahead"),
            ("ahead_dvy", "the relative lateral speed of the car ahead"),
            ("left_dx", "the gap to the nearest car in the left lane"),
            ("left_dy", "the lateral offset of the nearest car in the left lane"),
            ("left_dvx", "the relative speed of the nearest car in the left lane"),
            ("left_dvy", "the relative lateral speed of the nearest car in the left lane"),
            ("right_dx", "the gap to the nearest car in the right lane"),
            ("right_dy", "the lateral offset of the nearest car in the right lane"),
            ("right_dvx", "the relative speed of the nearest car in the right lane"),
            ("right_dvy", "the relative lateral speed of the nearest car in the right lane"),
            ("other_dx", "the gap to the nearest other car"),
            ("other_dy", "the lateral offset of the nearest other car"),
            ("other_dvx", "the relative speed of the nearest other car"),
            ("other_dvy", "the relative lateral speed of the nearest other car"),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_cover_their_dictionaries() {
        for d in Domain::ALL {
            let problems = PhraseTable::for_domain(d).completeness_problems(&PredicateDictionary::for_domain(d));
            assert!(problems.is_empty(), "{d}: {problems:?}");
        }
    }

    #[test]
    fn missing_token_is_reported() {
        let mut t = PhraseTable::for_domain(Domain::Taxi);
        t.actions.retain(|(k, _)| *k != "wait");
        assert_eq!(t.completeness_problems(&PredicateDictionary::taxi()), vec!["action `wait`".to_string()]);
        assert_eq!(t.action("wait"), Err(MissingPhrase("wait".into())));
    }
}
