//! Small fully connected networks with hand-written backprop.

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::scalar::softmax;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Dense {
    inputs: usize,
    outputs: usize,
    /// Row-major `outputs x inputs`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    fn new<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit);
        Self { inputs, outputs, weights: (0..inputs * outputs).map(|_| dist.sample(rng)).collect(), bias: vec![0.0; outputs] }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| self.bias[o] + self.weights[o * self.inputs..(o + 1) * self.inputs].iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
}

/// Tanh hidden layers, linear output, inputs divided by a fixed scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
    input_scale: Vec<f64>,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], input_scale: Vec<f64>, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        assert_eq!(input_scale.len(), sizes[0]);
        let layers = sizes.windows(2).map(|w| Dense::new(w[0], w[1], rng)).collect();
        Self { layers, input_scale }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().outputs
    }

    /// Activations of every layer, input first.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.iter().zip(&self.input_scale).map(|(v, s)| v / s).collect::<Vec<_>>()];
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = layer.apply(acts.last().unwrap());
            if i + 1 < self.layers.len() {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(out);
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.activations(x).pop().unwrap()
    }

    /// Output and the parameter gradient of `upstream . output`.
    pub fn backward(&self, x: &[f64], upstream: impl FnOnce(&[f64]) -> Vec<f64>) -> (Vec<f64>, Vec<f64>) {
        let acts = self.activations(x);
        let output = acts.last().unwrap().clone();
        let mut delta = upstream(&output);
        let mut grads: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len()];
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &acts[i];
            let mut g = vec![0.0; layer.weights.len() + layer.bias.len()];
            for o in 0..layer.outputs {
                for j in 0..layer.inputs {
                    g[o * layer.inputs + j] = delta[o] * input[j];
                }
                g[layer.weights.len() + o] = delta[o];
            }
            grads[i] = g;
            if i > 0 {
                // through the previous layer's tanh
                delta = (0..layer.inputs)
                    .map(|j| {
                        let back: f64 = (0..layer.outputs).map(|o| delta[o] * layer.weights[o * layer.inputs + j]).sum();
                        back * (1.0 - input[j] * input[j])
                    })
                    .collect();
            }
        }
        (output, grads.concat())
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias).copied()).collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|p| *p = it.next().unwrap());
        }
    }
}

/// Three-layer softmax policy used as the unstructured baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpPolicy {
    pub net: Mlp,
}

impl MlpPolicy {
    pub const HIDDEN: usize = 64;

    pub fn new<R: Rng + ?Sized>(obs_dim: usize, n_actions: usize, input_scale: Vec<f64>, rng: &mut R) -> Self {
        Self { net: Mlp::new(&[obs_dim, Self::HIDDEN, Self::HIDDEN, n_actions], input_scale, rng) }
    }

    pub fn probs(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.net.forward(x))
    }

    pub fn log_prob_and_grad(&self, x: &[f64], action: usize) -> (f64, Vec<f64>) {
        let mut logp = 0.0;
        let (_, grad) = self.net.backward(x, |logits| {
            let p = softmax(logits);
            logp = p[action].ln();
            p.iter().enumerate().map(|(b, pb)| if b == action { 1.0 - pb } else { -pb }).collect()
        });
        (logp, grad)
    }
}

/// State-value approximator: one tanh hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueNet {
    pub net: Mlp,
}

impl ValueNet {
    pub const HIDDEN: usize = 64;

    pub fn new<R: Rng + ?Sized>(obs_dim: usize, input_scale: Vec<f64>, rng: &mut R) -> Self {
        Self { net: Mlp::new(&[obs_dim, Self::HIDDEN, 1], input_scale, rng) }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.net.forward(x)[0]
    }

    /// Value and gradient of `0.5 * (v - target)^2`.
    pub fn squared_error_grad(&self, x: &[f64], target: f64) -> (f64, Vec<f64>) {
        let (out, grad) = self.net.backward(x, |v| vec![v[0] - target]);
        (out[0], grad)
    }
}
