use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::MlpPolicy;
use super::RlError;
use crate::ddt::Ddt;
use crate::scalar::softmax;

/// A stochastic policy with a flat, differentiable parameter vector.
pub trait Policy: Clone + Send + Sync {
    fn obs_dim(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn probs(&self, obs: &[f64]) -> Result<Vec<f64>, RlError>;
    /// `log pi(action | obs)` and its gradient with respect to `params()`.
    fn log_prob_and_grad(&self, obs: &[f64], action: usize) -> Result<(f64, Vec<f64>), RlError>;
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, params: &[f64]) -> Result<(), RlError>;

    /// Entropy of the action distribution and its parameter gradient.
    ///
    /// Uses `dH = -sum_b pi_b log(pi_b) dlog(pi_b)`, which follows from the
    /// probabilities summing to one.
    fn entropy_and_grad(&self, obs: &[f64]) -> Result<(f64, Vec<f64>), RlError> {
        let probs = self.probs(obs)?;
        let mut entropy = 0.0;
        let mut grad = vec![0.0; self.params().len()];
        for (b, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            entropy -= p * p.ln();
            let (logp, g) = self.log_prob_and_grad(obs, b)?;
            let coef = -p * logp;
            grad.iter_mut().zip(&g).for_each(|(acc, gi)| *acc += coef * gi);
        }
        Ok((entropy, grad))
    }

    fn sample<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<usize, RlError> {
        let probs = self.probs(obs)?;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (a, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return Ok(a);
            }
        }
        Ok(probs.len() - 1)
    }
}

impl Policy for Ddt<f64> {
    fn obs_dim(&self) -> usize {
        Ddt::obs_dim(self)
    }

    fn n_actions(&self) -> usize {
        Ddt::n_actions(self)
    }

    fn probs(&self, obs: &[f64]) -> Result<Vec<f64>, RlError> {
        Ok(self.forward(obs)?.probs)
    }

    fn log_prob_and_grad(&self, obs: &[f64], action: usize) -> Result<(f64, Vec<f64>), RlError> {
        let (lp, g) = self.log_prob_and_grads(obs, action)?;
        Ok((lp, g.flat()))
    }

    fn params(&self) -> Vec<f64> {
        self.params_flat()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<(), RlError> {
        Ok(self.set_params_flat(params)?)
    }
}

impl Policy for MlpPolicy {
    fn obs_dim(&self) -> usize {
        self.net.input_dim()
    }

    fn n_actions(&self) -> usize {
        self.net.output_dim()
    }

    fn probs(&self, obs: &[f64]) -> Result<Vec<f64>, RlError> {
        check_obs(obs, self.obs_dim())?;
        Ok(MlpPolicy::probs(self, obs))
    }

    fn log_prob_and_grad(&self, obs: &[f64], action: usize) -> Result<(f64, Vec<f64>), RlError> {
        check_obs(obs, self.obs_dim())?;
        if action >= self.n_actions() {
            return Err(RlError::InvalidConfig(format!("action {action} out of range")));
        }
        Ok(MlpPolicy::log_prob_and_grad(self, obs, action))
    }

    fn entropy_and_grad(&self, obs: &[f64]) -> Result<(f64, Vec<f64>), RlError> {
        check_obs(obs, self.obs_dim())?;
        let mut entropy = 0.0;
        let (_, grad) = self.net.backward(obs, |logits| {
            let p = softmax(logits);
            entropy = -p.iter().filter(|v| **v > 0.0).map(|v| v * v.ln()).sum::<f64>();
            p.iter().map(|pk| if *pk > 0.0 { -pk * (pk.ln() + entropy) } else { 0.0 }).collect()
        });
        Ok((entropy, grad))
    }

    fn params(&self) -> Vec<f64> {
        self.net.params()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<(), RlError> {
        if params.len() != self.net.n_params() {
            return Err(RlError::InvalidConfig(format!("expected {} parameters, got {}", self.net.n_params(), params.len())));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(RlError::NonFinite("policy parameters".into()));
        }
        self.net.set_params(params);
        Ok(())
    }
}

fn check_obs(obs: &[f64], dim: usize) -> Result<(), RlError> {
    if obs.len() != dim {
        return Err(RlError::InvalidConfig(format!("observation has {} features, expected {dim}", obs.len())));
    }
    if obs.iter().any(|v| !v.is_finite()) {
        return Err(RlError::NonFinite("observation".into()));
    }
    Ok(())
}

/// Serialized form of any trainable policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyModel {
    Ddt(Ddt<f64>),
    Mlp(MlpPolicy),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddt::LeafMode;
    use crate::rl::mlp::MlpPolicy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn entropy_fd<P: Policy>(p: &P, obs: &[f64]) {
        let (_, g) = p.entropy_and_grad(obs).unwrap();
        let base = p.params();
        let h = 1e-6;
        for i in 0..base.len().min(40) {
            let mut a = p.clone();
            let mut b = p.clone();
            let mut pa = base.clone();
            let mut pb = base.clone();
            pa[i] += h;
            pb[i] -= h;
            a.set_params(&pa).unwrap();
            b.set_params(&pb).unwrap();
            let fd = (a.entropy_and_grad(obs).unwrap().0 - b.entropy_and_grad(obs).unwrap().0) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6 * (1.0 + fd.abs()), "param {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn entropy_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mlp = MlpPolicy::new(3, 3, vec![1.0; 3], &mut rng);
        entropy_fd(&mlp, &[0.2, 0.4, -0.3]);
        let ddt = crate::rl::random_ddt(crate::tree::Domain::Taxi, 4, 9);
        assert_eq!(ddt.leaf_mode(), LeafMode::Logits);
        entropy_fd(&ddt, &[0.0, 1.0, 0.0, 0.3, 0.1]);
    }

    #[test]
    fn sampling_follows_probabilities() {
        let ddt = Ddt::single_leaf(vec![0.0, 1.0_f64.ln() + 1.0], 2, LeafMode::Logits).unwrap();
        let p = Policy::probs(&ddt, &[0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20000;
        let ones = (0..n).filter(|_| ddt.sample(&[0.0, 0.0], &mut rng).unwrap() == 1).count();
        assert!((ones as f64 / n as f64 - p[1]).abs() < 0.02);
    }
}
