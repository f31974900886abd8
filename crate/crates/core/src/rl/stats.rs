use serde::{Deserialize, Serialize};

use super::RlError;

/// `series[k]` is the mean of `returns[k..k + window]`.
pub fn rolling_reward(returns: &[f64], window: usize) -> Result<Vec<f64>, RlError> {
    if window == 0 || returns.len() < window {
        return Err(RlError::InsufficientData(format!("{} episodes, rolling window {window}", returns.len())));
    }
    let mut sum: f64 = returns[..window].iter().sum();
    let mut out = Vec::with_capacity(returns.len() - window + 1);
    out.push(sum / window as f64);
    for k in window..returns.len() {
        sum += returns[k] - returns[k - window];
        out.push(sum / window as f64);
    }
    Ok(out)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Standard error of the mean using the sample standard deviation.
pub fn standard_error(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub runs: usize,
    pub median_initial: f64,
    pub se_initial: f64,
    pub median_max_rolling: f64,
    pub se_max_rolling: f64,
    pub initial_per_run: Vec<f64>,
    pub max_rolling_per_run: Vec<f64>,
}

/// Aggregates several runs the way the learning-curve comparison reports them.
pub fn summarize_runs(runs: &[Vec<f64>], window: usize) -> Result<RunSummary, RlError> {
    if runs.len() < 2 {
        return Err(RlError::InsufficientData(format!("{} runs, need at least 2", runs.len())));
    }
    let mut initial = Vec::with_capacity(runs.len());
    let mut best = Vec::with_capacity(runs.len());
    for r in runs {
        let rolling = rolling_reward(r, window)?;
        initial.push(rolling[0]);
        best.push(rolling.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(RunSummary {
        runs: runs.len(),
        median_initial: median(&initial),
        se_initial: standard_error(&initial),
        median_max_rolling: median(&best),
        se_max_rolling: standard_error(&best),
        initial_per_run: initial,
        max_rolling_per_run: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rolling_over_arithmetic_sequence() {
        let r: Vec<f64> = (1..=200).map(f64::from).collect();
        let s = rolling_reward(&r, 100).unwrap();
        assert_eq!(s.len(), 101);
        assert_eq!(s[0], 50.5);
        assert_eq!(s[100], 150.5);
    }

    #[test]
    fn constant_returns_give_constant_series() {
        let s = rolling_reward(&[4.0; 150], 100).unwrap();
        assert!(s.iter().all(|v| (*v - 4.0).abs() < 1e-12));
    }

    #[test]
    fn short_log_is_an_error() {
        assert!(rolling_reward(&[1.0; 50], 100).is_err());
        assert!(rolling_reward(&[1.0; 50], 0).is_err());
    }

    #[test]
    fn median_initial_of_five_runs() {
        let runs: Vec<Vec<f64>> = [5.0, 1.0, 4.0, 2.0, 3.0].iter().map(|m| vec![*m; 100]).collect();
        let s = summarize_runs(&runs, 100).unwrap();
        assert_eq!(s.median_initial, 3.0);
        assert!((s.se_initial - (2.5f64 / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn identical_runs_have_zero_error() {
        let run: Vec<f64> = (0..300).map(|i| (i as f64 * 0.37).sin() * 10.0).collect();
        let s = summarize_runs(&vec![run.clone(); 5], 100).unwrap();
        let rolling = rolling_reward(&run, 100).unwrap();
        assert_eq!(s.median_initial, rolling[0]);
        assert_eq!(s.median_max_rolling, rolling.iter().copied().fold(f64::MIN, f64::max));
        assert_eq!(s.se_initial, 0.0);
        assert_eq!(s.se_max_rolling, 0.0);
    }

    #[test]
    fn needs_two_runs() {
        assert!(summarize_runs(&[vec![1.0; 100]], 100).is_err());
    }

    #[test]
    fn median_of_even_count_averages_middle() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
