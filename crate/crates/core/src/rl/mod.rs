//! Policy optimization with PPO and aggregation of repeated runs.

mod adam;
mod log;
mod mlp;
mod policy;
mod ppo;
mod stats;

use std::thread;

use thiserror::Error;

use crate::ddt::{init_from_lexical, Ddt, DdtError, InitConfig};
use crate::envs::{EnvConfig, EnvError};
use crate::tree::LexicalTree;

pub use crate::ddt::random_ddt;
pub use adam::{clip_grad_norm, Adam};
pub use log::{EpisodeRecord, TrainingLog, UpdateStats};
pub use mlp::{Mlp, MlpPolicy, ValueNet};
pub use policy::{Policy, PolicyModel};
pub use ppo::{episode_seed, gae, ppo_loss_and_grad, train, vanilla_pg_loss_and_grad, PpoConfig, Sample, SurrogateStats};
pub use stats::{median, rolling_reward, standard_error, summarize_runs, RunSummary};

#[derive(Debug, Error)]
pub enum RlError {
    #[error(transparent)]
    Ddt(#[from] DdtError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("malformed training log: {0}")]
    Log(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Trains one copy of `policy` per seed, concurrently.
///
/// Seed `s` drives both the PPO randomness and the environment stream. The
/// returned runs are in the order of `seeds`, each with its trained policy.
pub fn train_seeds<P: Policy>(
    policy: &P,
    env_cfg: &EnvConfig,
    cfg: &PpoConfig,
    label: &str,
    seeds: &[u64],
) -> Vec<Result<(TrainingLog, P), RlError>> {
    thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let mut p = policy.clone();
                let env = env_cfg.with_seed(seed);
                let run_cfg = PpoConfig { seed, ..cfg.clone() };
                let run_label = format!("{label}/seed{seed}");
                scope.spawn(move || train(&mut p, &env, &run_cfg, &run_label).map(|log| (log, p)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
    })
}

/// Outcome of screening several candidate initializations.
#[derive(Debug, Clone)]
pub struct Selection {
    pub best: usize,
    /// Highest rolling reward reached by each candidate during screening.
    pub scores: Vec<f64>,
    pub logs: Vec<TrainingLog>,
}

/// Trains each candidate tree for a short budget and keeps the best one.
///
/// Candidates are scored by their maximum rolling reward; ties go to the
/// earlier candidate.
pub fn select_best_initialization(
    candidates: &[LexicalTree],
    init: &InitConfig,
    env_cfg: &EnvConfig,
    screening: &PpoConfig,
) -> Result<Selection, RlError> {
    if candidates.is_empty() {
        return Err(RlError::InvalidConfig("no candidate trees".into()));
    }
    let dict = candidates[0].dictionary();
    if candidates.iter().any(|t| t.domain != env_cfg.domain) {
        return Err(RlError::InvalidConfig(format!("every candidate must be a {} tree", env_cfg.domain)));
    }
    let policies = candidates.iter().map(|t| init_from_lexical::<f64>(t, &dict, init)).collect::<Result<Vec<Ddt<f64>>, _>>()?;
    let results: Vec<Result<TrainingLog, RlError>> = thread::scope(|scope| {
        let handles: Vec<_> = policies
            .into_iter()
            .enumerate()
            .map(|(i, mut p)| {
                scope.spawn(move || train(&mut p, env_cfg, screening, &format!("candidate{i}")))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
    });
    let logs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let scores = logs
        .iter()
        .map(|l| rolling_reward(&l.returns(), screening.window).map(|s| s.into_iter().fold(f64::NEG_INFINITY, f64::max)))
        .collect::<Result<Vec<_>, _>>()?;
    let best = scores.iter().enumerate().fold(0, |b, (i, s)| if *s > scores[b] { i } else { b });
    Ok(Selection { best, scores, logs })
}
