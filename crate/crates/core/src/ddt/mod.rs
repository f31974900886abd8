//! Differentiable decision tree policies.
//!
//! Each decision node computes `D = sigmoid(alpha * (w . x - c))`, the
//! probability of taking its true branch. A leaf is reached with the product
//! of the branch probabilities along its path, and the policy output is the
//! reach-weighted sum of the leaf action distributions.

mod discretize;
mod grad;
mod init;

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{softmax, Scalar};
use crate::tree::Domain;

pub use grad::DdtGrad;
pub use init::{init_from_lexical, random_ddt, InitConfig, DEFAULT_LEAF_CONCENTRATION};

#[derive(Debug, Error, PartialEq)]
pub enum DdtError {
    #[error("input has {found} features, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("action {action} has zero probability")]
    ZeroProbability { action: usize },
    #[error("action index {action} out of range for {n_actions} actions")]
    InvalidAction { action: usize, n_actions: usize },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("tree is for {tree}, dictionary is for {dictionary}")]
    DomainMismatch { tree: Domain, dictionary: Domain },
    #[error("leaf concentration {0} must lie in (1/|A|, 1)")]
    InvalidConcentration(f64),
}

/// Reference from a decision node to one of its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Child {
    Decision(usize),
    Leaf(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + DeserializeOwned")]
pub struct DecisionNode<T> {
    pub weights: Vec<T>,
    pub comparator: T,
    pub on_true: Child,
    pub on_false: Child,
}

/// How leaf parameters become action distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafMode {
    /// Leaves hold logits and are passed through a softmax. Used for training.
    Logits,
    /// Leaves hold probabilities used as-is.
    Probabilities,
}

/// Probability distribution over actions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution<T> {
    pub probs: Vec<T>,
}

impl<T: Scalar> ActionDistribution<T> {
    pub fn argmax(&self) -> usize {
        crate::scalar::argmax(&self.probs)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p.to_f64_lossy();
            if u < acc {
                return i;
            }
        }
        // rounding left a sliver above the cumulative sum
        self.probs.iter().rposition(|p| *p > T::zero()).unwrap_or(0)
    }

    pub fn entropy(&self) -> T {
        -self.probs.iter().filter(|p| **p > T::zero()).map(|&p| p * p.ln()).sum::<T>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + DeserializeOwned")]
struct RawDdt<T> {
    root: Child,
    nodes: Vec<DecisionNode<T>>,
    leaves: Vec<Vec<T>>,
    alpha: T,
    alpha_learnable: bool,
    leaf_mode: LeafMode,
    hard: bool,
    obs_dim: usize,
    n_actions: usize,
}

/// Differentiable decision tree.
///
/// Decision nodes and leaves are stored in pre-order (true branch first), so
/// a node's children always have larger indices than the node itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    bound = "T: Scalar + Serialize + DeserializeOwned",
    try_from = "RawDdt<T>",
    into = "RawDdt<T>"
)]
pub struct Ddt<T> {
    raw: RawDdt<T>,
}

impl<T: Scalar> TryFrom<RawDdt<T>> for Ddt<T> {
    type Error = DdtError;

    fn try_from(raw: RawDdt<T>) -> Result<Self, DdtError> {
        let ddt = Ddt { raw };
        ddt.check()?;
        Ok(ddt)
    }
}

impl<T> From<Ddt<T>> for RawDdt<T> {
    fn from(d: Ddt<T>) -> Self {
        d.raw
    }
}

impl<T: Scalar> Ddt<T> {
    /// Builds a soft tree, checking that the topology is a proper binary tree
    /// stored in pre-order and that every parameter has the right shape.
    pub fn new(
        root: Child,
        nodes: Vec<DecisionNode<T>>,
        leaves: Vec<Vec<T>>,
        alpha: T,
        leaf_mode: LeafMode,
    ) -> Result<Self, DdtError> {
        let obs_dim = nodes.first().map_or(0, |n| n.weights.len());
        let n_actions = leaves.first().map_or(0, Vec::len);
        Self::try_from(RawDdt {
            root,
            nodes,
            leaves,
            alpha,
            alpha_learnable: false,
            leaf_mode,
            hard: false,
            obs_dim,
            n_actions,
        })
    }

    /// Single-leaf tree with an explicit observation size.
    pub fn single_leaf(leaf: Vec<T>, obs_dim: usize, leaf_mode: LeafMode) -> Result<Self, DdtError> {
        let n_actions = leaf.len();
        Self::try_from(RawDdt {
            root: Child::Leaf(0),
            nodes: Vec::new(),
            leaves: vec![leaf],
            alpha: T::one(),
            alpha_learnable: false,
            leaf_mode,
            hard: false,
            obs_dim,
            n_actions,
        })
    }

    fn check(&self) -> Result<(), DdtError> {
        let r = &self.raw;
        if r.n_actions == 0 {
            return Err(DdtError::InvalidParams("leaves must have at least one action".into()));
        }
        if !(r.alpha > T::zero() && r.alpha.is_finite()) {
            return Err(DdtError::InvalidParams(format!("alpha must be positive and finite, got {}", r.alpha)));
        }
        for (i, n) in r.nodes.iter().enumerate() {
            if n.weights.len() != r.obs_dim {
                return Err(DdtError::InvalidParams(format!("node {i} has {} weights, expected {}", n.weights.len(), r.obs_dim)));
            }
            if !n.comparator.is_finite() || n.weights.iter().any(|w| !w.is_finite()) {
                return Err(DdtError::InvalidParams(format!("node {i} has non-finite parameters")));
            }
        }
        for (i, l) in r.leaves.iter().enumerate() {
            if l.len() != r.n_actions {
                return Err(DdtError::InvalidParams(format!("leaf {i} has {} entries, expected {}", l.len(), r.n_actions)));
            }
            if l.iter().any(|v| !v.is_finite()) {
                return Err(DdtError::InvalidParams(format!("leaf {i} has non-finite entries")));
            }
            if r.leaf_mode == LeafMode::Probabilities {
                let total: T = l.iter().copied().sum();
                if l.iter().any(|&p| p < T::zero()) || (total - T::one()).abs() > T::of(1e-6) {
                    return Err(DdtError::InvalidParams(format!("leaf {i} is not a probability distribution")));
                }
            }
        }
        // Pre-order walk must visit every node and leaf exactly once, in index order.
        let mut next_node = 0;
        let mut next_leaf = 0;
        let mut stack = vec![r.root];
        while let Some(child) = stack.pop() {
            match child {
                Child::Decision(i) => {
                    if i != next_node || i >= r.nodes.len() {
                        return Err(DdtError::InvalidTopology(format!("decision {i} out of pre-order position")));
                    }
                    next_node += 1;
                    stack.push(r.nodes[i].on_false);
                    stack.push(r.nodes[i].on_true);
                }
                Child::Leaf(i) => {
                    if i != next_leaf || i >= r.leaves.len() {
                        return Err(DdtError::InvalidTopology(format!("leaf {i} out of pre-order position")));
                    }
                    next_leaf += 1;
                }
            }
        }
        if next_node != r.nodes.len() || next_leaf != r.leaves.len() {
            return Err(DdtError::InvalidTopology("unreachable nodes or leaves".into()));
        }
        Ok(())
    }

    pub fn root(&self) -> Child {
        self.raw.root
    }

    pub fn nodes(&self) -> &[DecisionNode<T>] {
        &self.raw.nodes
    }

    pub fn leaves(&self) -> &[Vec<T>] {
        &self.raw.leaves
    }

    pub fn alpha(&self) -> T {
        self.raw.alpha
    }

    pub fn alpha_learnable(&self) -> bool {
        self.raw.alpha_learnable
    }

    pub fn leaf_mode(&self) -> LeafMode {
        self.raw.leaf_mode
    }

    /// True for discretized trees, whose decisions are crisp step functions.
    pub fn is_hard(&self) -> bool {
        self.raw.hard
    }

    pub fn obs_dim(&self) -> usize {
        self.raw.obs_dim
    }

    pub fn n_actions(&self) -> usize {
        self.raw.n_actions
    }

    pub fn set_alpha(&mut self, alpha: T, learnable: bool) -> Result<(), DdtError> {
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(DdtError::InvalidParams(format!("alpha must be positive and finite, got {alpha}")));
        }
        self.raw.alpha = alpha;
        self.raw.alpha_learnable = learnable;
        Ok(())
    }

    /// Converts every parameter to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Ddt<U> {
        let c = |v: T| U::of(v.to_f64_lossy());
        let r = &self.raw;
        Ddt {
            raw: RawDdt {
                root: r.root,
                nodes: r
                    .nodes
                    .iter()
                    .map(|n| DecisionNode {
                        weights: n.weights.iter().map(|&w| c(w)).collect(),
                        comparator: c(n.comparator),
                        on_true: n.on_true,
                        on_false: n.on_false,
                    })
                    .collect(),
                leaves: r.leaves.iter().map(|l| l.iter().map(|&v| c(v)).collect()).collect(),
                alpha: c(r.alpha),
                alpha_learnable: r.alpha_learnable,
                leaf_mode: r.leaf_mode,
                hard: r.hard,
                obs_dim: r.obs_dim,
                n_actions: r.n_actions,
            },
        }
    }

    pub(crate) fn check_input(&self, x: &[T]) -> Result<(), DdtError> {
        if x.len() != self.raw.obs_dim {
            return Err(DdtError::DimensionMismatch { expected: self.raw.obs_dim, found: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DdtError::NonFiniteInput);
        }
        Ok(())
    }

    /// `w . x - c` for one node.
    pub(crate) fn margin(&self, node: usize, x: &[T]) -> T {
        let n = &self.raw.nodes[node];
        n.weights.iter().zip(x).map(|(&w, &xi)| w * xi).sum::<T>() - n.comparator
    }

    /// Probability of the true branch at `node`.
    pub(crate) fn branch_prob(&self, margin: T) -> T {
        if self.raw.hard {
            if margin > T::zero() {
                T::one()
            } else if margin < T::zero() {
                T::zero()
            } else {
                T::of(0.5)
            }
        } else {
            (self.raw.alpha * margin).sigmoid()
        }
    }

    /// True-branch probability of every decision node.
    pub fn decision_probs(&self, x: &[T]) -> Result<Vec<T>, DdtError> {
        self.check_input(x)?;
        Ok((0..self.raw.nodes.len()).map(|n| self.branch_prob(self.margin(n, x))).collect())
    }

    /// Action distribution of one leaf.
    pub fn leaf_distribution(&self, leaf: usize) -> Vec<T> {
        match self.raw.leaf_mode {
            LeafMode::Logits => softmax(&self.raw.leaves[leaf]),
            LeafMode::Probabilities => self.raw.leaves[leaf].clone(),
        }
    }

    pub(crate) fn reach(&self, probs: &[T]) -> (Vec<T>, Vec<T>) {
        let mut node_reach = vec![T::zero(); self.raw.nodes.len()];
        let mut leaf_reach = vec![T::zero(); self.raw.leaves.len()];
        let mut stack = vec![(self.raw.root, T::one())];
        while let Some((child, r)) = stack.pop() {
            match child {
                Child::Leaf(i) => leaf_reach[i] = r,
                Child::Decision(n) => {
                    node_reach[n] = r;
                    let d = probs[n];
                    stack.push((self.raw.nodes[n].on_true, r * d));
                    stack.push((self.raw.nodes[n].on_false, r * (T::one() - d)));
                }
            }
        }
        (node_reach, leaf_reach)
    }

    /// Probability of reaching each leaf; sums to one.
    pub fn leaf_weights(&self, x: &[T]) -> Result<Vec<T>, DdtError> {
        let probs = self.decision_probs(x)?;
        Ok(self.reach(&probs).1)
    }

    pub fn forward(&self, x: &[T]) -> Result<ActionDistribution<T>, DdtError> {
        let weights = self.leaf_weights(x)?;
        let mut probs = vec![T::zero(); self.raw.n_actions];
        for (i, w) in weights.iter().enumerate() {
            for (p, q) in probs.iter_mut().zip(self.leaf_distribution(i)) {
                *p += *w * q;
            }
        }
        Ok(ActionDistribution { probs })
    }

    /// Number of trainable scalars in [`Self::params_flat`].
    pub fn n_params(&self) -> usize {
        self.raw.nodes.len() * (self.raw.obs_dim + 1)
            + self.raw.leaves.len() * self.raw.n_actions
            + usize::from(self.raw.alpha_learnable)
    }

    /// Trainable parameters: per node its weights then comparator, then every
    /// leaf, then alpha when learnable.
    pub fn params_flat(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n_params());
        for n in &self.raw.nodes {
            out.extend_from_slice(&n.weights);
            out.push(n.comparator);
        }
        for l in &self.raw.leaves {
            out.extend_from_slice(l);
        }
        if self.raw.alpha_learnable {
            out.push(self.raw.alpha);
        }
        out
    }

    /// Inverse of [`Self::params_flat`]. Alpha is floored at a small positive
    /// value so gradient steps cannot make it non-positive.
    pub fn set_params_flat(&mut self, flat: &[T]) -> Result<(), DdtError> {
        if flat.len() != self.n_params() {
            return Err(DdtError::InvalidParams(format!("expected {} parameters, got {}", self.n_params(), flat.len())));
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(DdtError::InvalidParams("non-finite parameter".into()));
        }
        let mut it = flat.iter().copied();
        for n in &mut self.raw.nodes {
            for w in &mut n.weights {
                *w = it.next().unwrap();
            }
            n.comparator = it.next().unwrap();
        }
        for l in &mut self.raw.leaves {
            for v in l.iter_mut() {
                *v = it.next().unwrap();
            }
        }
        if self.raw.alpha_learnable {
            self.raw.alpha = it.next().unwrap().max(T::of(1e-6));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The three-node example tree with one-hot leaves used directly as probabilities.
    pub(crate) fn worked_example() -> Ddt<f64> {
        let node = |w: [f64; 4], c: f64, t: Child, f: Child| DecisionNode { weights: w.to_vec(), comparator: c, on_true: t, on_false: f };
        Ddt::new(
            Child::Decision(0),
            vec![
                node([0.0, 0.0, 1.0, 0.0], 3.0, Child::Decision(1), Child::Decision(2)),
                node([0.0, 0.6, 0.0, 0.5], 0.0, Child::Leaf(0), Child::Leaf(1)),
                node([1.0, 0.5, 0.0, 0.0], 1.0, Child::Leaf(2), Child::Leaf(3)),
            ],
            vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            1.0,
            LeafMode::Probabilities,
        )
        .unwrap()
    }

    #[test]
    fn worked_example_forward() {
        let ddt = worked_example();
        let x = [0.1, 0.4, 2.0, -0.3];
        let w = ddt.leaf_weights(&x).unwrap();
        for (got, want) in w.iter().zip([0.140, 0.129, 0.241, 0.489]) {
            assert!((got - want).abs() < 5e-3, "{got} vs {want}");
        }
        let out = ddt.forward(&x).unwrap();
        assert!((out.probs[0] - 0.618).abs() < 5e-3);
        assert!((out.probs[1] - 0.382).abs() < 5e-3);
    }

    #[test]
    fn single_leaf_is_input_independent() {
        let ddt = Ddt::single_leaf(vec![0.0, 1.0], 3, LeafMode::Logits).unwrap();
        let a = ddt.forward(&[1.0, 2.0, 3.0]).unwrap();
        let b = ddt.forward(&[-5.0, 0.0, 9.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sharp_alpha_selects_leaf_exactly() {
        let mut ddt = worked_example();
        ddt.set_alpha(1e6, false).unwrap();
        // root false (2 < 3), then node 2 clearly true (x0 + 0.5 x1 = 2.5 > 1)
        let out = ddt.forward(&[2.0, 1.0, 2.0, 0.0]).unwrap();
        assert!((out.probs[0] - 0.0).abs() < 1e-9);
        assert!((out.probs[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn input_errors() {
        let ddt = worked_example();
        assert!(matches!(ddt.forward(&[1.0]), Err(DdtError::DimensionMismatch { expected: 4, found: 1 })));
        assert_eq!(ddt.forward(&[f64::NAN, 0.0, 0.0, 0.0]), Err(DdtError::NonFiniteInput));
    }

    #[test]
    fn topology_must_be_pre_order() {
        let node = |t, f| DecisionNode { weights: vec![1.0], comparator: 0.0, on_true: t, on_false: f };
        let bad = Ddt::new(Child::Decision(0), vec![node(Child::Leaf(1), Child::Leaf(0))], vec![vec![0.0], vec![0.0]], 1.0, LeafMode::Logits);
        assert!(matches!(bad, Err(DdtError::InvalidTopology(_))));
        let shared = Ddt::new(Child::Decision(0), vec![node(Child::Leaf(0), Child::Leaf(0))], vec![vec![0.0]], 1.0, LeafMode::Logits);
        assert!(shared.is_err());
    }

    #[test]
    fn flat_params_round_trip_and_serde() {
        let mut ddt = worked_example();
        ddt.set_alpha(2.0, true).unwrap();
        let flat = ddt.params_flat();
        assert_eq!(flat.len(), ddt.n_params());
        let mut other = ddt.clone();
        other.set_params_flat(&flat).unwrap();
        assert_eq!(other, ddt);
        let json = serde_json::to_string(&ddt).unwrap();
        let back: Ddt<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ddt);
        let f32_tree: Ddt<f32> = ddt.cast();
        let p32 = f32_tree.forward(&[0.1, 0.4, 2.0, -0.3]).unwrap().probs[0];
        let p64 = ddt.forward(&[0.1, 0.4, 2.0, -0.3]).unwrap().probs[0];
        assert!((f64::from(p32) - p64).abs() < 1e-6);
    }

    #[test]
    fn invalid_documents_are_rejected() {
        let json = serde_json::to_string(&worked_example()).unwrap().replace("\"alpha\":1.0", "\"alpha\":-1.0");
        assert!(serde_json::from_str::<Ddt<f64>>(&json).is_err());
    }
}
