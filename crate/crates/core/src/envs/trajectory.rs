//! Line-delimited JSON trajectory dumps, one record per step.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: usize,
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub done: bool,
}

pub fn write_trajectory<W: Write>(mut out: W, records: &[TrajectoryRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trajectory<R: BufRead>(input: R) -> io::Result<Vec<TrajectoryRecord>> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| serde_json::from_str(&l?).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)))
        .collect()
}
