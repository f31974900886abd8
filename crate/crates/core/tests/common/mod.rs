//! Shared fixtures and independent reference implementations for the
//! integration tests. Nothing here calls into the library's own evaluation
//! code, so agreement with it is meaningful.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use treepolicy::ddt::{Child, DecisionNode, LeafMode};
use treepolicy::tree::{parse_dsl, Domain, LexicalTree, PredicateDictionary};
use treepolicy::Ddt64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The three-node tree from the worked example, sharpness 1.
pub fn worked_example() -> Ddt64 {
    let node = |w: [f64; 4], c: f64, on_true, on_false| DecisionNode { weights: w.to_vec(), comparator: c, on_true, on_false };
    Ddt64::new(
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

pub const WORKED_INPUT: [f64; 4] = [0.1, 0.4, 2.0, -0.3];

pub fn good_tree(domain: Domain) -> LexicalTree {
    let text = match domain {
        Domain::Taxi => include_str!("../data/taxi_good.dsl"),
        Domain::Highway => include_str!("../data/highway_good.dsl"),
    };
    parse_dsl(text, &PredicateDictionary::for_domain(domain)).expect("fixture parses")
}

pub fn dims(domain: Domain) -> (usize, usize) {
    let d = PredicateDictionary::for_domain(domain);
    (d.obs_dim(), d.n_actions())
}

/// Soft tree with random shape (1 to `max_leaves` leaves), random parameters,
/// random sharpness and a random leaf parameterization.
pub fn random_soft_ddt<R: Rng>(obs_dim: usize, n_actions: usize, max_leaves: usize, rng: &mut R) -> Ddt64 {
    fn grow<R: Rng>(
        leaves_here: usize,
        obs_dim: usize,
        n_actions: usize,
        probs: bool,
        nodes: &mut Vec<DecisionNode<f64>>,
        leaves: &mut Vec<Vec<f64>>,
        rng: &mut R,
    ) -> Child {
        if leaves_here == 1 {
            let leaf: Vec<f64> = if probs {
                let raw: Vec<f64> = (0..n_actions).map(|_| rng.gen_range(0.05..1.0)).collect();
                let total: f64 = raw.iter().sum();
                raw.iter().map(|v| v / total).collect()
            } else {
                (0..n_actions).map(|_| rng.gen_range(-2.0..2.0)).collect()
            };
            leaves.push(leaf);
            return Child::Leaf(leaves.len() - 1);
        }
        let idx = nodes.len();
        nodes.push(DecisionNode {
            weights: (0..obs_dim).map(|_| rng.gen_range(-1.5..1.5)).collect(),
            comparator: rng.gen_range(-1.0..1.0),
            on_true: Child::Leaf(0),
            on_false: Child::Leaf(0),
        });
        let left = rng.gen_range(1..leaves_here);
        let t = grow(left, obs_dim, n_actions, probs, nodes, leaves, rng);
        let f = grow(leaves_here - left, obs_dim, n_actions, probs, nodes, leaves, rng);
        nodes[idx].on_true = t;
        nodes[idx].on_false = f;
        Child::Decision(idx)
    }

    let n_leaves = rng.gen_range(1..=max_leaves);
    let probs = rng.gen_bool(0.5);
    let mut nodes = Vec::new();
    let mut leaves = Vec::new();
    let root = grow(n_leaves, obs_dim, n_actions, probs, &mut nodes, &mut leaves, rng);
    let mode = if probs { LeafMode::Probabilities } else { LeafMode::Logits };
    let mut ddt = if nodes.is_empty() {
        Ddt64::single_leaf(leaves.pop().unwrap(), obs_dim, mode).unwrap()
    } else {
        Ddt64::new(root, nodes, leaves, 1.0, mode).unwrap()
    };
    ddt.set_alpha(rng.gen_range(0.3..3.0), rng.gen_bool(0.5)).unwrap();
    ddt
}

pub fn random_input<R: Rng>(obs_dim: usize, rng: &mut R) -> Vec<f64> {
    (0..obs_dim).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn leaf_probs(ddt: &Ddt64, leaf: usize) -> Vec<f64> {
    let raw = &ddt.leaves()[leaf];
    match ddt.leaf_mode() {
        LeafMode::Probabilities => raw.clone(),
        LeafMode::Logits => {
            let exps: Vec<f64> = raw.iter().map(|v| v.exp()).collect();
            let total: f64 = exps.iter().sum();
            exps.iter().map(|e| e / total).collect()
        }
    }
}

/// Action distribution computed by listing every root-to-leaf path and
/// multiplying the branch probabilities along it.
pub fn path_enumeration(ddt: &Ddt64, x: &[f64]) -> Vec<f64> {
    let mut paths: Vec<(usize, f64)> = Vec::new();
    let mut pending = vec![(ddt.root(), 1.0)];
    while let Some((child, p)) = pending.pop() {
        match child {
            Child::Leaf(i) => paths.push((i, p)),
            Child::Decision(n) => {
                let node = &ddt.nodes()[n];
                let z: f64 = node.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() - node.comparator;
                let d = sigmoid(ddt.alpha() * z);
                pending.push((node.on_true, p * d));
                pending.push((node.on_false, p * (1.0 - d)));
            }
        }
    }
    let mut out = vec![0.0; ddt.n_actions()];
    for (leaf, p) in paths {
        for (o, q) in out.iter_mut().zip(leaf_probs(ddt, leaf)) {
            *o += p * q;
        }
    }
    out
}

/// Action chosen by walking a discretized tree with plain comparisons.
pub fn crisp_action(hard: &Ddt64, x: &[f64]) -> usize {
    let mut child = hard.root();
    loop {
        match child {
            Child::Leaf(i) => {
                let leaf = &hard.leaves()[i];
                return (0..leaf.len()).fold(0, |best, a| if leaf[a] > leaf[best] { a } else { best });
            }
            Child::Decision(n) => {
                let node = &hard.nodes()[n];
                let j = node.weights.iter().position(|w| *w != 0.0).expect("discretized node tests one feature");
                let goes_true = if node.weights[j] > 0.0 { x[j] > node.comparator } else { -x[j] > node.comparator };
                child = if goes_true { node.on_true } else { node.on_false };
            }
        }
    }
}

/// Five-point central differences of `log pi(a | x)` over the flat
/// parameters, using the path-enumeration oracle for every evaluation.
pub fn finite_difference_grad(ddt: &Ddt64, x: &[f64], action: usize, h: f64) -> Vec<f64> {
    let base = ddt.params_flat();
    let mut probe = ddt.clone();
    (0..base.len())
        .map(|k| {
            let mut eval = |delta: f64| {
                let mut p = base.clone();
                p[k] += delta;
                probe.set_params_flat(&p).unwrap();
                path_enumeration(&probe, x)[action].ln()
            };
            (8.0 * (eval(h) - eval(-h)) - (eval(2.0 * h) - eval(-2.0 * h))) / (12.0 * h)
        })
        .collect()
}

/// Largest `|a - b| / max(|a|, |b|, floor)` over paired entries.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor)).fold(0.0, f64::max)
}
