//! Taxi dispatch between an airport, a city and a village.
//!
//! Passengers wait at the city (boarding on arrival) and at the village
//! (boarding after a random wait that the `wait` action counts down). A
//! boarded passenger is driven straight to the airport, and delivering one
//! earns +20. Every step costs 1. Travel takes several steps; actions chosen
//! while driving are ignored.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EnvConfig, EnvError, Observation, StepOutcome};

pub(crate) const EPISODE_LENGTH: usize = 60;
pub(crate) const OBS_DIM: usize = 5;
pub const STEP_COST: f64 = 1.0;
pub const DELIVERY_REWARD: f64 = 20.0;
pub const MAX_VILLAGE_WAIT: u32 = 8;

const DRIVE_AIRPORT: usize = 0;
const DRIVE_CITY: usize = 1;
const DRIVE_VILLAGE: usize = 2;
const WAIT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Airport,
    City,
    Village,
}

impl Location {
    fn index(self) -> usize {
        match self {
            Location::Airport => 0,
            Location::City => 1,
            Location::Village => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transit {
    pub to: Location,
    pub remaining: u32,
}

#[derive(Debug, Clone)]
pub struct TaxiState {
    /// Current location, or the origin while driving.
    pub location: Location,
    pub traffic: f64,
    pub village_wait: u32,
    pub has_passenger: bool,
    pub transit: Option<Transit>,
    pub t: usize,
    pub done: bool,
    pub episode_length: usize,
    rng: ChaCha8Rng,
}

/// Steps needed to drive between two locations.
pub fn travel_time(from: Location, to: Location, traffic: f64) -> u32 {
    use Location::*;
    match (from, to) {
        (a, b) if a == b => 0,
        (Village, Airport) | (Airport, Village) => 2,
        (City, Airport) | (Airport, City) => 2 + (4.0 * traffic).round() as u32,
        (Village, City) | (City, Village) => 3,
        _ => unreachable!(),
    }
}

impl TaxiState {
    pub fn reset(cfg: &EnvConfig) -> (TaxiState, Observation) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let traffic = cfg.fixed_traffic.unwrap_or_else(|| rng.gen_range(0.0..=1.0));
        let state = TaxiState {
            location: Location::Airport,
            traffic,
            village_wait: 0,
            has_passenger: false,
            transit: None,
            t: 0,
            done: false,
            episode_length: cfg.episode_length,
            rng,
        };
        let obs = state.observe();
        (state, obs)
    }

    /// `[one-hot location (3), traffic, village_wait / 10]`.
    pub fn observe(&self) -> Observation {
        let mut f = vec![0.0; OBS_DIM];
        f[self.location.index()] = 1.0;
        f[3] = self.traffic;
        f[4] = f64::from(self.village_wait) / 10.0;
        Observation(f)
    }

    pub fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        if self.done {
            return Err(EnvError::StepAfterDone);
        }
        if action > WAIT {
            return Err(EnvError::InvalidAction { action, n_actions: 4 });
        }
        let mut reward = -STEP_COST;
        if self.transit.is_some() {
            reward += self.advance();
        } else {
            let dest = match action {
                DRIVE_AIRPORT => Some(Location::Airport),
                DRIVE_CITY => Some(Location::City),
                DRIVE_VILLAGE => Some(Location::Village),
                _ => None,
            };
            match dest {
                Some(to) if to != self.location => {
                    self.depart(to);
                    reward += self.advance();
                }
                Some(_) => {}
                None => {
                    if self.location == Location::Village && !self.has_passenger {
                        self.village_wait = self.village_wait.saturating_sub(1);
                        if self.village_wait == 0 {
                            self.board();
                        }
                    }
                }
            }
        }
        self.t += 1;
        self.done = self.t >= self.episode_length;
        Ok(StepOutcome { observation: self.observe(), reward, done: self.done })
    }

    fn depart(&mut self, to: Location) {
        if self.location == Location::Village {
            self.village_wait = 0;
        }
        let remaining = travel_time(self.location, to, self.traffic);
        self.transit = Some(Transit { to, remaining });
    }

    fn board(&mut self) {
        self.has_passenger = true;
        self.depart(Location::Airport);
    }

    /// Moves one step along the current trip; returns any delivery reward.
    fn advance(&mut self) -> f64 {
        let Some(mut trip) = self.transit else { return 0.0 };
        trip.remaining = trip.remaining.saturating_sub(1);
        if trip.remaining > 0 {
            self.transit = Some(trip);
            return 0.0;
        }
        self.transit = None;
        self.location = trip.to;
        match trip.to {
            Location::Airport if self.has_passenger => {
                self.has_passenger = false;
                DELIVERY_REWARD
            }
            Location::Airport => 0.0,
            Location::City => {
                if !self.has_passenger {
                    self.board();
                }
                0.0
            }
            Location::Village => {
                self.village_wait = self.rng.gen_range(0..=MAX_VILLAGE_WAIT);
                if !self.has_passenger && self.village_wait == 0 {
                    self.board();
                }
                0.0
            }
        }
    }
}
