//! Taxi and highway MDPs with fixed-length observations.

mod highway;
mod taxi;
mod trajectory;

use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::Domain;

pub use highway::{HighwayState, Vehicle, LANE_WIDTH, N_LANES, SENTINEL_DX};
pub use taxi::{Location, TaxiState, Transit};
pub use trajectory::{read_trajectory, write_trajectory, TrajectoryRecord};

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("step called on a finished episode")]
    StepAfterDone,
    #[error("action {action} out of range for {n_actions} actions")]
    InvalidAction { action: usize, n_actions: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Fixed-length feature vector consumed by policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observation(pub Vec<f64>);

impl Deref for Observation {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub domain: Domain,
    pub seed: u64,
    pub episode_length: usize,
    /// Taxi only: pin the traffic level instead of sampling it per episode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_traffic: Option<f64>,
    /// Highway only: number of other vehicles.
    #[serde(default = "default_cars")]
    pub n_cars: usize,
}

fn default_cars() -> usize {
    12
}

impl EnvConfig {
    pub fn new(domain: Domain, seed: u64) -> Self {
        let episode_length = match domain {
            Domain::Taxi => taxi::EPISODE_LENGTH,
            Domain::Highway => highway::EPISODE_LENGTH,
        };
        Self { domain, seed, episode_length, fixed_traffic: None, n_cars: default_cars() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn check(&self) -> Result<(), EnvError> {
        if self.episode_length == 0 {
            return Err(EnvError::InvalidConfig("episode_length must be positive".into()));
        }
        if let Some(t) = self.fixed_traffic {
            if !(0.0..=1.0).contains(&t) {
                return Err(EnvError::InvalidConfig(format!("traffic {t} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
}

/// A running episode of either domain.
#[derive(Debug, Clone)]
pub enum Env {
    Taxi(TaxiState),
    Highway(HighwayState),
}

impl Env {
    pub fn reset(cfg: &EnvConfig) -> Result<(Env, Observation), EnvError> {
        cfg.check()?;
        Ok(match cfg.domain {
            Domain::Taxi => {
                let (s, o) = TaxiState::reset(cfg);
                (Env::Taxi(s), o)
            }
            Domain::Highway => {
                let (s, o) = HighwayState::reset(cfg);
                (Env::Highway(s), o)
            }
        })
    }

    pub fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        match self {
            Env::Taxi(s) => s.step(action),
            Env::Highway(s) => s.step(action),
        }
    }

    pub fn observe(&self) -> Observation {
        match self {
            Env::Taxi(s) => s.observe(),
            Env::Highway(s) => s.observe(),
        }
    }

    pub fn is_done(&self) -> bool {
        match self {
            Env::Taxi(s) => s.done,
            Env::Highway(s) => s.done,
        }
    }
}

pub fn obs_dim(domain: Domain) -> usize {
    match domain {
        Domain::Taxi => taxi::OBS_DIM,
        Domain::Highway => highway::OBS_DIM,
    }
}

pub fn n_actions(domain: Domain) -> usize {
    match domain {
        Domain::Taxi => 4,
        Domain::Highway => 5,
    }
}

/// Typical magnitude of each observation slot, for normalizing network inputs.
pub fn observation_scale(domain: Domain) -> Vec<f64> {
    match domain {
        Domain::Taxi => vec![1.0; taxi::OBS_DIM],
        Domain::Highway => {
            let mut s = vec![8.0, 30.0];
            for _ in 0..4 {
                s.extend([100.0, 8.0, 10.0, 1.0]);
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::PredicateDictionary;

    #[test]
    fn dimensions_agree_with_dictionaries() {
        for d in Domain::ALL {
            let dict = PredicateDictionary::for_domain(d);
            assert_eq!(obs_dim(d), dict.obs_dim());
            assert_eq!(n_actions(d), dict.n_actions());
            assert_eq!(observation_scale(d).len(), obs_dim(d));
            let (_, obs) = Env::reset(&EnvConfig::new(d, 3)).unwrap();
            assert_eq!(obs.len(), obs_dim(d));
        }
    }

    #[test]
    fn zero_length_episode_is_rejected() {
        let mut cfg = EnvConfig::new(Domain::Taxi, 0);
        cfg.episode_length = 0;
        assert!(Env::reset(&cfg).is_err());
    }
}
