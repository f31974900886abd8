//! Three-lane highway with constant-speed traffic.
//!
//! The ego car changes lanes instantly and adjusts speed in 2 m/s steps.
//! Sharing a lane with a car whose gap comes within 5 m at any time during
//! the one-second step is a crash (reward -1, episode over); otherwise the
//! reward grows linearly with speed from 0.1 at 20 m/s to 0.5 at 30 m/s.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvConfig, EnvError, Observation, StepOutcome};

pub(crate) const EPISODE_LENGTH: usize = 40;
pub(crate) const OBS_DIM: usize = 18;
pub const N_LANES: usize = 3;
pub const LANE_WIDTH: f64 = 4.0;
pub const MIN_SPEED: f64 = 20.0;
pub const MAX_SPEED: f64 = 30.0;
pub const SPEED_STEP: f64 = 2.0;
pub const CRASH_DISTANCE: f64 = 5.0;
pub const SENTINEL_DX: f64 = 100.0;
/// Side-lane slots ignore cars further behind than this.
pub const SIDE_LOOKBEHIND: f64 = 10.0;
const MIN_SPAWN_GAP: f64 = 12.0;
const MAX_SPAWN_GAP: f64 = 36.0;

const LANE_LEFT: usize = 0;
const LANE_RIGHT: usize = 2;
const FASTER: usize = 3;
const SLOWER: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub lane: usize,
    pub x: f64,
    pub speed: f64,
}

#[derive(Debug, Clone)]
pub struct HighwayState {
    pub ego: Vehicle,
    pub others: Vec<Vehicle>,
    pub t: usize,
    pub crashed: bool,
    pub done: bool,
    pub episode_length: usize,
}

pub fn lane_y(lane: usize) -> f64 {
    lane as f64 * LANE_WIDTH
}

/// Smallest `|gap|` while the gap moves linearly from `before` to `after`.
fn closest_gap(before: f64, after: f64) -> f64 {
    if before.signum() != after.signum() {
        0.0
    } else {
        before.abs().min(after.abs())
    }
}

impl HighwayState {
    pub fn reset(cfg: &EnvConfig) -> (HighwayState, Observation) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut x = 8.0;
        let others = (0..cfg.n_cars)
            .map(|_| {
                x += rng.gen_range(MIN_SPAWN_GAP..MAX_SPAWN_GAP);
                Vehicle { lane: rng.gen_range(0..N_LANES), x, speed: rng.gen_range(18.0..=26.0) }
            })
            .collect();
        let state = HighwayState {
            ego: Vehicle { lane: 1, x: 0.0, speed: 25.0 },
            others,
            t: 0,
            crashed: false,
            done: false,
            episode_length: cfg.episode_length,
        };
        let obs = state.observe();
        (state, obs)
    }

    pub fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        if self.done {
            return Err(EnvError::StepAfterDone);
        }
        if action > SLOWER {
            return Err(EnvError::InvalidAction { action, n_actions: 5 });
        }
        match action {
            LANE_LEFT => self.ego.lane = self.ego.lane.saturating_sub(1),
            LANE_RIGHT => self.ego.lane = (self.ego.lane + 1).min(N_LANES - 1),
            FASTER => self.ego.speed = (self.ego.speed + SPEED_STEP).min(MAX_SPEED),
            SLOWER => self.ego.speed = (self.ego.speed - SPEED_STEP).max(MIN_SPEED),
            _ => {}
        }
        let before: Vec<f64> = self.others.iter().map(|c| c.x - self.ego.x).collect();
        self.ego.x += self.ego.speed;
        for c in &mut self.others {
            c.x += c.speed;
        }
        self.crashed = self
            .others
            .iter()
            .zip(&before)
            .any(|(c, &b)| c.lane == self.ego.lane && closest_gap(b, c.x - self.ego.x) <= CRASH_DISTANCE);
        self.t += 1;
        let reward = if self.crashed {
            -1.0
        } else {
            0.1 + 0.4 * (self.ego.speed - MIN_SPEED) / (MAX_SPEED - MIN_SPEED)
        };
        self.done = self.crashed || self.t >= self.episode_length;
        Ok(StepOutcome { observation: self.observe(), reward, done: self.done })
    }

    /// Indices of the cars shown in the four observation slots: nearest ahead
    /// in the ego lane, nearest in the left and right lanes (at most 10 m
    /// behind), and the nearest remaining car by distance.
    pub fn slot_cars(&self) -> [Option<usize>; 4] {
        let dx = |c: &Vehicle| c.x - self.ego.x;
        let pick = |keep: &dyn Fn(usize, &Vehicle) -> bool, key: &dyn Fn(&Vehicle) -> f64| {
            let mut best: Option<(usize, f64)> = None;
            for (i, c) in self.others.iter().enumerate() {
                if keep(i, c) {
                    let k = key(c);
                    if best.map_or(true, |(_, bk)| k < bk) {
                        best = Some((i, k));
                    }
                }
            }
            best.map(|(i, _)| i)
        };
        let lane = self.ego.lane;
        let ahead = pick(&|_, c| c.lane == lane && dx(c) >= 0.0, &dx);
        let side = |target: Option<usize>| {
            target.and_then(|l| pick(&|_, c| c.lane == l && dx(c) >= -SIDE_LOOKBEHIND, &|c| dx(c).abs()))
        };
        let left = side(lane.checked_sub(1));
        let right = side((lane + 1 < N_LANES).then_some(lane + 1));
        let taken = [ahead, left, right];
        let other = pick(
            &|i, _| !taken.contains(&Some(i)),
            &|c| dx(c).hypot(lane_y(c.lane) - lane_y(lane)),
        );
        [ahead, left, right, other]
    }

    /// `[ego y, ego speed]` then `[dx, dy, dvx, dvy]` per slot, with absent
    /// cars reported as `dx = 100` and zeros.
    pub fn observe(&self) -> Observation {
        let mut f = vec![lane_y(self.ego.lane), self.ego.speed];
        for slot in self.slot_cars() {
            match slot {
                Some(i) => {
                    let c = &self.others[i];
                    f.extend([c.x - self.ego.x, lane_y(c.lane) - lane_y(self.ego.lane), c.speed - self.ego.speed, 0.0]);
                }
                None => f.extend([SENTINEL_DX, 0.0, 0.0, 0.0]),
            }
        }
        Observation(f)
    }
}
