//! Encoding lexical trees as differentiable trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Child, Ddt, DdtError, DecisionNode, LeafMode, RawDdt};
use crate::scalar::Scalar;
use crate::tree::{Domain, LexicalTree, Node, PredicateDictionary};

pub const DEFAULT_LEAF_CONCENTRATION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    /// Probability mass a leaf puts on its own action; the rest is spread
    /// evenly over the others.
    pub leaf_concentration: f64,
    pub alpha: f64,
    pub alpha_learnable: bool,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self { leaf_concentration: DEFAULT_LEAF_CONCENTRATION, alpha: 1.0, alpha_learnable: false }
    }
}

/// Accumulates nodes and leaves in pre-order.
pub(crate) struct Builder<T> {
    pub nodes: Vec<DecisionNode<T>>,
    pub leaves: Vec<Vec<T>>,
}

impl<T: Scalar> Builder<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new(), leaves: Vec::new() }
    }

    pub fn leaf(&mut self, values: Vec<T>) -> Child {
        self.leaves.push(values);
        Child::Leaf(self.leaves.len() - 1)
    }

    /// Reserves a decision slot before its children are built.
    pub fn open(&mut self, weights: Vec<T>, comparator: T) -> usize {
        self.nodes.push(DecisionNode { weights, comparator, on_true: Child::Leaf(0), on_false: Child::Leaf(0) });
        self.nodes.len() - 1
    }

    pub fn close(&mut self, index: usize, on_true: Child, on_false: Child) -> Child {
        self.nodes[index].on_true = on_true;
        self.nodes[index].on_false = on_false;
        Child::Decision(index)
    }

    pub fn finish(
        self,
        root: Child,
        obs_dim: usize,
        n_actions: usize,
        alpha: T,
        alpha_learnable: bool,
        leaf_mode: LeafMode,
        hard: bool,
    ) -> Result<Ddt<T>, DdtError> {
        Ddt::try_from(RawDdt {
            root,
            nodes: self.nodes,
            leaves: self.leaves,
            alpha,
            alpha_learnable,
            leaf_mode,
            hard,
            obs_dim,
            n_actions,
        })
    }
}

/// A randomly initialized DDT with a balanced topology of `n_leaves` leaves.
///
/// Weights and comparators are standard normal; leaf logits are normal with
/// standard deviation 0.1. `n_leaves` of zero is treated as one.
pub fn random_ddt<T: Scalar>(domain: Domain, n_leaves: usize, seed: u64) -> Ddt<T> {
    fn grow<T: Scalar>(n: usize, b: &mut Builder<T>, rng: &mut ChaCha8Rng, obs_dim: usize, n_actions: usize) -> Child {
        if n <= 1 {
            let logits = (0..n_actions).map(|_| T::of(0.1 * rng.sample::<f64, _>(StandardNormal))).collect();
            return b.leaf(logits);
        }
        let weights = (0..obs_dim).map(|_| T::of(rng.sample(StandardNormal))).collect();
        let idx = b.open(weights, T::of(rng.sample(StandardNormal)));
        let t = grow(n - n / 2, b, rng, obs_dim, n_actions);
        let f = grow(n / 2, b, rng, obs_dim, n_actions);
        b.close(idx, t, f)
    }
    let (obs_dim, n_actions) = (crate::envs::obs_dim(domain), crate::envs::n_actions(domain));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    let root = grow(n_leaves, &mut b, &mut rng, obs_dim, n_actions);
    b.finish(root, obs_dim, n_actions, T::one(), false, LeafMode::Logits, false)
        .expect("balanced random topology is valid")
}

/// Builds a DDT whose crisp reading is exactly `tree`.
///
/// A `greater` predicate on feature `j` with threshold `t` becomes weight
/// `+1` at `j` and comparator `t`; a `less` predicate becomes `-1` and `-t`,
/// so the margin is positive exactly when the predicate holds. Thresholds are
/// converted from human units to observation units.
pub fn init_from_lexical<T: Scalar>(tree: &LexicalTree, dict: &PredicateDictionary, cfg: &InitConfig) -> Result<Ddt<T>, DdtError> {
    if tree.domain != dict.domain {
        return Err(DdtError::DomainMismatch { tree: tree.domain, dictionary: dict.domain });
    }
    let n_actions = dict.n_actions();
    let beta = cfg.leaf_concentration;
    if !(beta > 1.0 / n_actions as f64 && beta < 1.0) {
        return Err(DdtError::InvalidConcentration(beta));
    }
    let on = T::of(beta.ln());
    let off = T::of(((1.0 - beta) / (n_actions - 1) as f64).ln());

    fn build<T: Scalar>(node: &Node, dict: &PredicateDictionary, b: &mut Builder<T>, on: T, off: T) -> Result<Child, DdtError> {
        match node {
            Node::Leaf { action } => {
                let a = dict.action_index(action).ok_or_else(|| DdtError::UnknownToken(action.clone()))?;
                Ok(b.leaf((0..dict.n_actions()).map(|i| if i == a { on } else { off }).collect()))
            }
            Node::Decision { predicate, threshold, if_true, if_false } => {
                let (feature, direction, default) =
                    dict.condition_of(predicate).ok_or_else(|| DdtError::UnknownToken(predicate.clone()))?;
                let human = threshold.or(default).ok_or_else(|| DdtError::UnknownToken(predicate.clone()))?;
                let sign = direction.sign();
                let mut weights = vec![T::zero(); dict.obs_dim()];
                weights[feature] = T::of(sign);
                let idx = b.open(weights, T::of(sign * human / dict.features[feature].scale));
                let t = build(if_true, dict, b, on, off)?;
                let f = build(if_false, dict, b, on, off)?;
                Ok(b.close(idx, t, f))
            }
        }
    }

    let mut b = Builder::new();
    let root = build(&tree.root, dict, &mut b, on, off)?;
    b.finish(root, dict.obs_dim(), n_actions, T::of(cfg.alpha), cfg.alpha_learnable, LeafMode::Logits, false)
}
