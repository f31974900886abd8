//! Analytic gradients of `log pi(a | x)`.
//!
//! With `V(n)` the probability of `a` conditioned on reaching node `n` and
//! `r(n)` the probability of reaching it, `pi = V(root)` and
//! `d pi / d D_n = r(n) * (V(true child) - V(false child))`. The chain rule
//! through `D_n = sigmoid(alpha * (w . x - c))` gives the node gradients;
//! leaves contribute `r(leaf) * d q / d z`.

use super::{Child, Ddt, DdtError, LeafMode};
use crate::scalar::Scalar;

/// Gradient of `log pi(a | x)`, shaped like the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DdtGrad<T> {
    pub weights: Vec<Vec<T>>,
    pub comparators: Vec<T>,
    pub leaves: Vec<Vec<T>>,
    /// `Some` when alpha is learnable.
    pub alpha: Option<T>,
    /// With respect to the observation.
    pub input: Vec<T>,
}

impl<T: Scalar> DdtGrad<T> {
    /// Flattened in the order of [`Ddt::params_flat`]; the input gradient is excluded.
    pub fn flat(&self) -> Vec<T> {
        let mut out = Vec::new();
        for (w, c) in self.weights.iter().zip(&self.comparators) {
            out.extend_from_slice(w);
            out.push(*c);
        }
        for l in &self.leaves {
            out.extend_from_slice(l);
        }
        if let Some(a) = self.alpha {
            out.push(a);
        }
        out
    }
}

impl<T: Scalar> Ddt<T> {
    /// `log pi(action | x)` and its exact gradient with respect to every
    /// parameter and the input.
    pub fn log_prob_and_grads(&self, x: &[T], action: usize) -> Result<(T, DdtGrad<T>), DdtError> {
        self.check_input(x)?;
        let n_actions = self.n_actions();
        if action >= n_actions {
            return Err(DdtError::InvalidAction { action, n_actions });
        }
        let nodes = self.nodes();
        let margins: Vec<T> = (0..nodes.len()).map(|n| self.margin(n, x)).collect();
        let probs: Vec<T> = margins.iter().map(|&m| self.branch_prob(m)).collect();
        let (node_reach, leaf_reach) = self.reach(&probs);
        let leaf_dists: Vec<Vec<T>> = (0..self.leaves().len()).map(|i| self.leaf_distribution(i)).collect();

        // Children have larger indices, so a reverse sweep sees them first.
        let mut value = vec![T::zero(); nodes.len()];
        let child_value = |c: Child, value: &[T]| match c {
            Child::Leaf(i) => leaf_dists[i][action],
            Child::Decision(n) => value[n],
        };
        for n in (0..nodes.len()).rev() {
            let d = probs[n];
            value[n] = d * child_value(nodes[n].on_true, &value) + (T::one() - d) * child_value(nodes[n].on_false, &value);
        }
        let pi = child_value(self.root(), &value);
        if !(pi > T::zero()) {
            return Err(DdtError::ZeroProbability { action });
        }

        let alpha = self.alpha();
        let mut grad = DdtGrad {
            weights: Vec::with_capacity(nodes.len()),
            comparators: Vec::with_capacity(nodes.len()),
            leaves: Vec::with_capacity(leaf_dists.len()),
            alpha: self.alpha_learnable().then(T::zero),
            input: vec![T::zero(); x.len()],
        };
        for (n, node) in nodes.iter().enumerate() {
            let d = probs[n];
            let d_pi = node_reach[n] * (child_value(node.on_true, &value) - child_value(node.on_false, &value));
            // hard trees have a flat step function
            let d_margin = if self.is_hard() { T::zero() } else { d_pi / pi * d * (T::one() - d) * alpha };
            grad.weights.push(x.iter().map(|&xi| d_margin * xi).collect());
            grad.comparators.push(-d_margin);
            for (g, &w) in grad.input.iter_mut().zip(&node.weights) {
                *g += d_margin * w;
            }
            if let Some(ga) = grad.alpha.as_mut() {
                if !self.is_hard() {
                    *ga += d_pi / pi * d * (T::one() - d) * margins[n];
                }
            }
        }
        for (i, q) in leaf_dists.iter().enumerate() {
            let scale = leaf_reach[i] / pi;
            let g = match self.leaf_mode() {
                LeafMode::Logits => (0..n_actions)
                    .map(|b| {
                        let delta = if b == action { T::one() } else { T::zero() };
                        scale * q[action] * (delta - q[b])
                    })
                    .collect(),
                LeafMode::Probabilities => (0..n_actions).map(|b| if b == action { scale } else { T::zero() }).collect(),
            };
            grad.leaves.push(g);
        }
        Ok((pi.ln(), grad))
    }
}
