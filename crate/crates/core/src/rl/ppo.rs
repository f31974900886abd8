use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{clip_grad_norm, Adam};
use super::log::{EpisodeRecord, TrainingLog, UpdateStats};
use super::mlp::ValueNet;
use super::policy::Policy;
use super::RlError;
use crate::envs::{self, Env, EnvConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_eps: f64,
    pub lr: f64,
    pub value_lr: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub rollout_steps: usize,
    pub total_episodes: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub normalize_advantages: bool,
    /// Rolling-reward window the run will be summarized with.
    pub window: usize,
    pub seed: u64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_eps: 0.2,
            lr: 3e-3,
            value_lr: 1e-3,
            epochs: 4,
            minibatch_size: 256,
            rollout_steps: 2048,
            total_episodes: 2000,
            entropy_coef: 0.01,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            normalize_advantages: true,
            window: 100,
            seed: 0,
        }
    }
}

impl PpoConfig {
    pub fn for_ddt() -> Self {
        Self::default()
    }

    pub fn for_mlp() -> Self {
        Self { lr: 1e-3, ..Self::default() }
    }

    pub fn check(&self) -> Result<(), RlError> {
        let bad = |m: &str| Err(RlError::InvalidConfig(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda must lie in [0, 1]");
        }
        if !(self.clip_eps >= 0.0) {
            return bad("clip_eps must be non-negative");
        }
        if !(self.lr > 0.0 && self.value_lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if self.epochs == 0 || self.minibatch_size == 0 || self.rollout_steps == 0 {
            return bad("epochs, minibatch_size and rollout_steps must be positive");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if self.total_episodes != 0 && self.total_episodes < self.window {
            return bad("total_episodes must be zero or at least the rolling window");
        }
        if !(self.max_grad_norm > 0.0) || !self.entropy_coef.is_finite() || !self.value_coef.is_finite() {
            return bad("coefficients must be finite and max_grad_norm positive");
        }
        Ok(())
    }
}

/// Generalized advantage estimates.
///
/// `dones[t]` marks that the episode ended after step `t`; `last_value`
/// bootstraps the step after the final one when its episode is still running.
pub fn gae(rewards: &[f64], values: &[f64], dones: &[bool], last_value: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let next = if t + 1 == n { last_value } else { values[t + 1] };
        let delta = rewards[t] + gamma * next * live - values[t];
        running = delta + gamma * lambda * live * running;
        adv[t] = running;
    }
    adv
}

/// One transition prepared for a policy update.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub obs: Vec<f64>,
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SurrogateStats {
    pub loss: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Clipped-surrogate loss `-mean(min(r A, clip(r) A))` and its gradient.
pub fn ppo_loss_and_grad<P: Policy>(policy: &P, batch: &[Sample], clip_eps: f64) -> Result<(SurrogateStats, Vec<f64>), RlError> {
    let mut grad = vec![0.0; policy.params().len()];
    let mut stats = SurrogateStats::default();
    if batch.is_empty() {
        return Ok((stats, grad));
    }
    let n = batch.len() as f64;
    for s in batch {
        let (logp, g) = policy.log_prob_and_grad(&s.obs, s.action)?;
        let ratio = (logp - s.old_log_prob).exp();
        let clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps);
        let (unclipped_obj, clipped_obj) = (ratio * s.advantage, clipped * s.advantage);
        stats.approx_kl += (s.old_log_prob - logp) / n;
        if unclipped_obj <= clipped_obj {
            stats.loss -= unclipped_obj / n;
            let coef = -s.advantage * ratio / n;
            grad.iter_mut().zip(&g).for_each(|(acc, gi)| *acc += coef * gi);
        } else {
            stats.loss -= clipped_obj / n;
            stats.clip_fraction += 1.0 / n;
        }
    }
    Ok((stats, grad))
}

/// Importance-weighted policy-gradient loss `-mean(r A)` without clipping.
pub fn vanilla_pg_loss_and_grad<P: Policy>(policy: &P, batch: &[Sample]) -> Result<(f64, Vec<f64>), RlError> {
    let mut grad = vec![0.0; policy.params().len()];
    let mut loss = 0.0;
    let n = batch.len().max(1) as f64;
    for s in batch {
        let (logp, g) = policy.log_prob_and_grad(&s.obs, s.action)?;
        let ratio = (logp - s.old_log_prob).exp();
        loss -= ratio * s.advantage / n;
        let coef = -s.advantage * ratio / n;
        grad.iter_mut().zip(&g).for_each(|(acc, gi)| *acc += coef * gi);
    }
    Ok((loss, grad))
}

/// Per-episode environment seed derived from the run's base seed.
pub fn episode_seed(base: u64, episode: usize) -> u64 {
    let mut z = base ^ (episode as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Transition {
    obs: Vec<f64>,
    action: usize,
    log_prob: f64,
    reward: f64,
    done: bool,
}

fn check_finite(what: &str, values: &[f64]) -> Result<(), RlError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(RlError::NonFinite(what.to_string()))
    }
}

/// Trains `policy` in place with clipped PPO and a separate value network.
pub fn train<P: Policy>(policy: &mut P, env_cfg: &EnvConfig, cfg: &PpoConfig, label: &str) -> Result<TrainingLog, RlError> {
    cfg.check()?;
    env_cfg.check()?;
    let obs_dim = envs::obs_dim(env_cfg.domain);
    let n_actions = envs::n_actions(env_cfg.domain);
    if policy.obs_dim() != obs_dim || policy.n_actions() != n_actions {
        return Err(RlError::InvalidConfig(format!(
            "policy has {}x{} dims, {} needs {obs_dim}x{n_actions}",
            policy.obs_dim(),
            policy.n_actions(),
            env_cfg.domain
        )));
    }
    let started = Instant::now();
    let mut log = TrainingLog::new(label, env_cfg.clone(), cfg.clone());
    if cfg.total_episodes == 0 {
        log.wall_clock_secs = started.elapsed().as_secs_f64();
        return Ok(log);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut value = ValueNet::new(obs_dim, envs::observation_scale(env_cfg.domain), &mut rng);
    let mut params = policy.params();
    let mut policy_opt = Adam::new(params.len(), cfg.lr);
    let mut value_params = value.net.params();
    let mut value_opt = Adam::new(value_params.len(), cfg.value_lr);

    let mut episode = 0usize;
    let (mut env, mut obs) = Env::reset(&env_cfg.with_seed(episode_seed(env_cfg.seed, 0)))?;
    let (mut ep_return, mut ep_len) = (0.0, 0usize);

    while episode < cfg.total_episodes {
        let mut buffer: Vec<Transition> = Vec::with_capacity(cfg.rollout_steps);
        while buffer.len() < cfg.rollout_steps && episode < cfg.total_episodes {
            let action = policy.sample(&obs, &mut rng)?;
            // same code path as the update, so an unchanged policy has ratio exactly 1
            let (log_prob, _) = policy.log_prob_and_grad(&obs, action)?;
            check_finite("action log-probability", &[log_prob])?;
            let step = env.step(action)?;
            ep_return += step.reward;
            ep_len += 1;
            buffer.push(Transition { obs: obs.0.clone(), action, log_prob, reward: step.reward, done: step.done });
            obs = step.observation;
            if step.done {
                log.episodes.push(EpisodeRecord { episode, ret: ep_return, length: ep_len });
                episode += 1;
                ep_return = 0.0;
                ep_len = 0;
                let (e, o) = Env::reset(&env_cfg.with_seed(episode_seed(env_cfg.seed, episode)))?;
                env = e;
                obs = o;
            }
        }

        let values: Vec<f64> = buffer.iter().map(|t| value.value(&t.obs)).collect();
        let last_value = if buffer.last().map_or(true, |t| t.done) { 0.0 } else { value.value(&obs) };
        let rewards: Vec<f64> = buffer.iter().map(|t| t.reward).collect();
        let dones: Vec<bool> = buffer.iter().map(|t| t.done).collect();
        let mut adv = gae(&rewards, &values, &dones, last_value, cfg.gamma, cfg.gae_lambda);
        let returns: Vec<f64> = adv.iter().zip(&values).map(|(a, v)| a + v).collect();
        check_finite("advantages", &adv)?;
        if cfg.normalize_advantages && adv.len() > 1 {
            let mean = adv.iter().sum::<f64>() / adv.len() as f64;
            let std = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / adv.len() as f64).sqrt();
            adv.iter_mut().for_each(|a| *a = (*a - mean) / (std + 1e-8));
        }
        let samples: Vec<Sample> = buffer
            .iter()
            .zip(&adv)
            .map(|(t, &a)| Sample { obs: t.obs.clone(), action: t.action, old_log_prob: t.log_prob, advantage: a })
            .collect();

        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut acc = UpdateStats { episodes_done: episode, ..UpdateStats::default() };
        let mut n_batches = 0usize;
        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.minibatch_size) {
                let batch: Vec<Sample> = chunk.iter().map(|&i| samples[i].clone()).collect();
                let (stats, mut grad) = ppo_loss_and_grad(policy, &batch, cfg.clip_eps)?;
                let mut entropy = 0.0;
                if cfg.entropy_coef != 0.0 {
                    let m = batch.len() as f64;
                    for s in &batch {
                        let (h, g) = policy.entropy_and_grad(&s.obs)?;
                        entropy += h / m;
                        let coef = -cfg.entropy_coef / m;
                        grad.iter_mut().zip(&g).for_each(|(a, gi)| *a += coef * gi);
                    }
                }
                check_finite("policy loss", &[stats.loss, entropy])?;
                check_finite("policy gradient", &grad)?;
                clip_grad_norm(&mut grad, cfg.max_grad_norm);
                policy_opt.step(&mut params, &grad);
                policy.set_params(&params)?;
                params = policy.params();

                let mut vgrad = vec![0.0; value_params.len()];
                let mut vloss = 0.0;
                let m = chunk.len() as f64;
                for &i in chunk {
                    let (v, g) = value.squared_error_grad(&samples[i].obs, returns[i]);
                    vloss += 0.5 * (v - returns[i]).powi(2) / m;
                    let coef = cfg.value_coef / m;
                    vgrad.iter_mut().zip(&g).for_each(|(a, gi)| *a += coef * gi);
                }
                check_finite("value loss", &[vloss])?;
                clip_grad_norm(&mut vgrad, cfg.max_grad_norm);
                value_opt.step(&mut value_params, &vgrad);
                value.net.set_params(&value_params);

                acc.policy_loss += stats.loss;
                acc.value_loss += vloss;
                acc.entropy += entropy;
                acc.approx_kl += stats.approx_kl;
                acc.clip_fraction += stats.clip_fraction;
                n_batches += 1;
            }
        }
        let probe = policy.probs(&obs)?;
        let total: f64 = probe.iter().sum();
        if probe.iter().any(|p| !p.is_finite() || *p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(RlError::NonFinite(format!("policy output is not a distribution after update (sum {total})")));
        }
        let k = n_batches.max(1) as f64;
        acc.policy_loss /= k;
        acc.value_loss /= k;
        acc.entropy /= k;
        acc.approx_kl /= k;
        acc.clip_fraction /= k;
        log.updates.push(acc);
    }
    log.wall_clock_secs = started.elapsed().as_secs_f64();
    Ok(log)
}
