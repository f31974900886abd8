use rand::seq::SliceRandom;
use rand::Rng;

use crate::tree::{LexicalTree, Node, PredicateDictionary, MAX_DEPTH};

/// Samples a tree whose depth is uniform over `depth_range` (inclusive,
/// clamped to the supported maximum).
///
/// One child of every decision is forced down to the target depth and the
/// other gets a uniformly drawn smaller depth. Predicates never repeat along
/// a root-to-leaf path, and two leaves under the same decision always differ.
pub fn sample_tree<R: Rng + ?Sized>(dict: &PredicateDictionary, depth_range: (usize, usize), rng: &mut R) -> LexicalTree {
    let hi = depth_range.1.clamp(1, MAX_DEPTH.min(dict.decisions.len() + 1));
    let lo = depth_range.0.clamp(1, hi);
    let depth = rng.gen_range(lo..=hi);
    let mut used = Vec::new();
    LexicalTree::new(dict.domain, grow(dict, depth, &mut used, rng))
}

fn random_action<R: Rng + ?Sized>(dict: &PredicateDictionary, avoid: Option<&str>, rng: &mut R) -> String {
    let choices: Vec<&str> = dict.actions.iter().map(|a| a.token).filter(|t| Some(*t) != avoid).collect();
    choices.choose(rng).expect("dictionary has at least two actions").to_string()
}

fn grow<R: Rng + ?Sized>(dict: &PredicateDictionary, depth: usize, used: &mut Vec<&'static str>, rng: &mut R) -> Node {
    if depth <= 1 {
        return Node::leaf(random_action(dict, None, rng));
    }
    let free: Vec<&'static str> = dict.decisions.iter().map(|d| d.token).filter(|t| !used.contains(t)).collect();
    let predicate = *free.choose(rng).expect("depth is bounded by the number of predicates");
    used.push(predicate);
    let spine_true = rng.gen_bool(0.5);
    let other_depth = rng.gen_range(1..depth);
    let (true_depth, false_depth) = if spine_true { (depth - 1, other_depth) } else { (other_depth, depth - 1) };
    let if_true = grow(dict, true_depth, used, rng);
    let mut if_false = grow(dict, false_depth, used, rng);
    if let (Node::Leaf { action: a }, Node::Leaf { action: b }) = (&if_true, &if_false) {
        if a == b {
            if_false = Node::leaf(random_action(dict, Some(a), rng));
        }
    }
    used.pop();
    Node::decision(predicate, if_true, if_false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{validate, Domain};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn no_repeats(node: &Node, path: &mut Vec<String>) -> bool {
        match node {
            Node::Leaf { .. } => true,
            Node::Decision { predicate, if_true, if_false, .. } => {
                if path.contains(predicate) {
                    return false;
                }
                path.push(predicate.clone());
                let ok = no_repeats(if_true, path) && no_repeats(if_false, path);
                path.pop();
                ok
            }
        }
    }

    #[test]
    fn depth_one_is_a_leaf() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert!(matches!(sample_tree(&PredicateDictionary::taxi(), (1, 1), &mut rng).root, Node::Leaf { .. }));
        }
    }

    #[test]
    fn samples_are_valid_and_within_range() {
        for domain in Domain::ALL {
            let dict = PredicateDictionary::for_domain(domain);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let mut seen = [0usize; 5];
            for _ in 0..1000 {
                let t = sample_tree(&dict, (2, 4), &mut rng);
                assert!(validate(&t, &dict).is_ok());
                assert!((2..=4).contains(&t.depth()));
                assert!(no_repeats(&t.root, &mut Vec::new()));
                seen[t.depth()] += 1;
            }
            // roughly uniform over the three depths
            assert!(seen[2..=4].iter().all(|&c| c > 250), "{seen:?}");
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let dict = PredicateDictionary::highway();
        let a: Vec<_> = (0..10).scan(ChaCha8Rng::seed_from_u64(5), |r, _| Some(sample_tree(&dict, (2, 4), r))).collect();
        let b: Vec<_> = (0..10).scan(ChaCha8Rng::seed_from_u64(5), |r, _| Some(sample_tree(&dict, (2, 4), r))).collect();
        assert_eq!(a, b);
    }
}
