//! Training logs as line-delimited JSON.
//!
//! A log file holds one `header` line, then `episode` and `update` lines in
//! the order they happened, then a `footer` with the wall-clock time.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::ppo::PpoConfig;
use super::RlError;
use crate::envs::EnvConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    #[serde(rename = "return")]
    pub ret: f64,
    pub length: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    /// Episodes completed when the update ran.
    pub episodes_done: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    pub label: String,
    pub env: EnvConfig,
    pub config: PpoConfig,
    pub episodes: Vec<EpisodeRecord>,
    pub updates: Vec<UpdateStats>,
    pub wall_clock_secs: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header { label: String, env: EnvConfig, config: PpoConfig },
    Episode(EpisodeRecord),
    Update(UpdateStats),
    Footer { wall_clock_secs: f64 },
}

impl TrainingLog {
    pub fn new(label: &str, env: EnvConfig, config: PpoConfig) -> Self {
        Self { label: label.to_string(), env, config, episodes: Vec::new(), updates: Vec::new(), wall_clock_secs: 0.0 }
    }

    pub fn returns(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.ret).collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), RlError> {
        let header = Line::Header { label: self.label.clone(), env: self.env.clone(), config: self.config.clone() };
        writeln!(out, "{}", serde_json::to_string(&header)?)?;
        // Episodes and updates are interleaved by the episode count at update time.
        let mut updates = self.updates.iter().peekable();
        for e in &self.episodes {
            while let Some(u) = updates.next_if(|u| u.episodes_done <= e.episode) {
                writeln!(out, "{}", serde_json::to_string(&Line::Update(u.clone()))?)?;
            }
            writeln!(out, "{}", serde_json::to_string(&Line::Episode(e.clone()))?)?;
        }
        for u in updates {
            writeln!(out, "{}", serde_json::to_string(&Line::Update(u.clone()))?)?;
        }
        writeln!(out, "{}", serde_json::to_string(&Line::Footer { wall_clock_secs: self.wall_clock_secs })?)?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, RlError> {
        let mut log: Option<TrainingLog> = None;
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(&line).map_err(|e| RlError::Log(format!("line {}: {e}", n + 1)))?;
            match (parsed, log.as_mut()) {
                (Line::Header { label, env, config }, None) => log = Some(TrainingLog::new(&label, env, config)),
                (Line::Header { .. }, Some(_)) => return Err(RlError::Log(format!("line {}: duplicate header", n + 1))),
                (_, None) => return Err(RlError::Log("log does not start with a header".into())),
                (Line::Episode(e), Some(l)) => l.episodes.push(e),
                (Line::Update(u), Some(l)) => l.updates.push(u),
                (Line::Footer { wall_clock_secs }, Some(l)) => l.wall_clock_secs = wall_clock_secs,
            }
        }
        log.ok_or_else(|| RlError::Log("empty log".into()))
    }
}
