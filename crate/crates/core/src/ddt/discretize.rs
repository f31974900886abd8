//! Crisp trees from trained DDTs.
//!
//! Every decision keeps only its largest-magnitude weight (lowest index on
//! ties), rescaled to `+-1`, with the comparator divided by that weight's
//! magnitude so the test `x_j > c / w_j` (or `<` for negative weights) is
//! unchanged. Leaves collapse to one-hot on their most likely action, and
//! decisions become step functions, the limit of an infinitely sharp sigmoid.

use super::init::Builder;
use super::{Child, Ddt, DdtError, LeafMode};
use crate::scalar::{argmax, Scalar};
use crate::tree::{Direction, LexicalTree, Node, PredicateDictionary};

impl<T: Scalar> Ddt<T> {
    pub fn discretize(&self) -> Ddt<T> {
        let mut b = Builder::new();
        let root = self.discretize_child(self.root(), &mut b);
        b.finish(root, self.obs_dim(), self.n_actions(), self.alpha(), self.alpha_learnable(), LeafMode::Probabilities, true)
            .expect("discretization preserves topology")
    }

    fn discretize_child(&self, child: Child, b: &mut Builder<T>) -> Child {
        match child {
            Child::Leaf(i) => {
                let best = argmax(&self.leaves()[i]);
                b.leaf((0..self.n_actions()).map(|a| if a == best { T::one() } else { T::zero() }).collect())
            }
            Child::Decision(n) => {
                let node = &self.nodes()[n];
                let magnitudes: Vec<T> = node.weights.iter().map(|w| w.abs()).collect();
                let j = argmax(&magnitudes);
                let (weights, comparator) = if magnitudes[j] > T::zero() {
                    let mut w = vec![T::zero(); self.obs_dim()];
                    w[j] = node.weights[j].signum();
                    (w, node.comparator / magnitudes[j])
                } else {
                    // constant decision: keep it as is
                    (node.weights.clone(), node.comparator)
                };
                let idx = b.open(weights, comparator);
                let t = self.discretize_child(node.on_true, b);
                let f = self.discretize_child(node.on_false, b);
                b.close(idx, t, f)
            }
        }
    }

    /// Discretizes and reads the result back as a lexical tree.
    ///
    /// Each decision is named with [`PredicateDictionary::canonical_condition`]
    /// and annotated with its learned threshold in human units. Constant
    /// decisions (all-zero weights) are replaced by the branch they always take.
    pub fn discretize_to_tree(&self, dict: &PredicateDictionary) -> Result<(Ddt<T>, LexicalTree), DdtError> {
        if self.obs_dim() != dict.obs_dim() || self.n_actions() != dict.n_actions() {
            return Err(DdtError::InvalidParams(format!(
                "tree has {} features and {} actions, {} dictionary has {} and {}",
                self.obs_dim(),
                self.n_actions(),
                dict.domain,
                dict.obs_dim(),
                dict.n_actions()
            )));
        }
        let hard = self.discretize();
        let root = hard.lexical_node(hard.root(), dict);
        Ok((hard, LexicalTree::new(dict.domain, root)))
    }

    fn lexical_node(&self, child: Child, dict: &PredicateDictionary) -> Node {
        match child {
            Child::Leaf(i) => {
                let a = argmax(&self.leaves()[i]);
                Node::leaf(dict.action_token(a).expect("action count checked"))
            }
            Child::Decision(n) => {
                let node = &self.nodes()[n];
                let Some(j) = node.weights.iter().position(|w| *w != T::zero()) else {
                    let taken = if -node.comparator >= T::zero() { node.on_true } else { node.on_false };
                    return self.lexical_node(taken, dict);
                };
                let w = node.weights[j];
                let direction = if w > T::zero() { Direction::Greater } else { Direction::Less };
                let threshold = (node.comparator / w).to_f64_lossy() * dict.features[j].scale;
                let canonical = dict.canonical_condition(j, direction, threshold);
                let t = self.lexical_node(node.on_true, dict);
                let f = self.lexical_node(node.on_false, dict);
                let (t, f) = if canonical.swapped { (f, t) } else { (t, f) };
                Node::annotated(canonical.token, threshold, t, f)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::worked_example;
    use super::*;
    use crate::ddt::{init_from_lexical, InitConfig};
    use crate::tree::Domain;

    #[test]
    fn worked_example_discretization() {
        let hard = worked_example().discretize();
        let expect = [([0.0, 0.0, 1.0, 0.0], 3.0), ([0.0, 1.0, 0.0, 0.0], 0.0), ([1.0, 0.0, 0.0, 0.0], 1.0)];
        for (node, (w, c)) in hard.nodes().iter().zip(expect) {
            assert_eq!(node.weights, w.to_vec());
            assert_eq!(node.comparator, c);
        }
        assert_eq!(hard.leaves(), worked_example().leaves());
        assert!(hard.is_hard());
    }

    #[test]
    fn discretization_is_idempotent() {
        let once = worked_example().discretize();
        assert_eq!(once.discretize(), once);
    }

    #[test]
    fn negative_weight_keeps_its_test() {
        let dict = PredicateDictionary::highway();
        let tree = LexicalTree::new(Domain::Highway, Node::decision("car_ahead_close", Node::leaf("lane_left"), Node::leaf("faster")));
        let mut ddt: Ddt<f64> = init_from_lexical(&tree, &dict, &InitConfig::default()).unwrap();
        // learned: -2 * dx + 26 > 0  <=>  dx < 13
        let mut flat = ddt.params_flat();
        flat[2] = -2.0;
        flat[18] = -26.0;
        ddt.set_params_flat(&flat).unwrap();
        let (hard, lex) = ddt.discretize_to_tree(&dict).unwrap();
        assert_eq!(hard.nodes()[0].weights[2], -1.0);
        assert_eq!(hard.nodes()[0].comparator, -13.0);
        assert_eq!(lex.root, Node::annotated("car_ahead_close", 13.0, Node::leaf("lane_left"), Node::leaf("faster")));
    }

    #[test]
    fn learned_threshold_is_annotated() {
        let dict = PredicateDictionary::taxi();
        let tree = LexicalTree::new(Domain::Taxi, Node::decision("wait_gt_2", Node::leaf("drive_city"), Node::leaf("wait")));
        let mut ddt: Ddt<f64> = init_from_lexical(&tree, &dict, &InitConfig::default()).unwrap();
        let mut flat = ddt.params_flat();
        flat[5] = 0.5; // comparator in observation units: wait > 5
        ddt.set_params_flat(&flat).unwrap();
        let (_, lex) = ddt.discretize_to_tree(&dict).unwrap();
        assert_eq!(lex.root, Node::annotated("wait_gt_5", 5.0, Node::leaf("drive_city"), Node::leaf("wait")));
    }

    #[test]
    fn constant_decision_collapses() {
        let dict = PredicateDictionary::taxi();
        let tree = LexicalTree::new(Domain::Taxi, Node::decision("at_city", Node::leaf("drive_city"), Node::leaf("wait")));
        let mut ddt: Ddt<f64> = init_from_lexical(&tree, &dict, &InitConfig::default()).unwrap();
        let mut flat = ddt.params_flat();
        flat[1] = 0.0;
        flat[5] = 1.0; // margin is -1 everywhere
        ddt.set_params_flat(&flat).unwrap();
        let (_, lex) = ddt.discretize_to_tree(&dict).unwrap();
        assert_eq!(lex.root, Node::leaf("wait"));
    }
}
