mod common;

use common::*;
use proptest::prelude::*;
use treepolicy::corpus::sample_tree;
use treepolicy::ddt::{init_from_lexical, InitConfig};
use treepolicy::explain::render_program;
use treepolicy::rl::PolicyModel;
use treepolicy::tree::{deserialize, detokenize, parse_dsl, serialize, tokenize, validate, Domain, LexicalTree, Node, PredicateDictionary};

fn domain_strategy() -> impl Strategy<Value = Domain> {
    prop_oneof![Just(Domain::Taxi), Just(Domain::Highway)]
}

fn sampled(domain: Domain, seed: u64) -> (PredicateDictionary, LexicalTree) {
    let dict = PredicateDictionary::for_domain(domain);
    let tree = sample_tree(&dict, (1, 4), &mut rng(seed));
    (dict, tree)
}

/// Every annotated threshold in pre-order.
fn thresholds(node: &Node, out: &mut Vec<(String, Option<f64>)>) {
    if let Node::Decision { predicate, threshold, if_true, if_false } = node {
        out.push((predicate.clone(), *threshold));
        thresholds(if_true, out);
        thresholds(if_false, out);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn program_text_parses_back(domain in domain_strategy(), seed in any::<u64>()) {
        let (dict, tree) = sampled(domain, seed);
        let text = render_program(&tree, &dict);
        prop_assert_eq!(parse_dsl(&text, &dict).unwrap(), tree);
    }

    #[test]
    fn schema_serialization_round_trips(domain in domain_strategy(), seed in any::<u64>()) {
        let (_, tree) = sampled(domain, seed);
        prop_assert_eq!(deserialize(&serialize(&tree)).unwrap(), tree);
    }

    #[test]
    fn token_sequence_round_trips(domain in domain_strategy(), seed in any::<u64>()) {
        let (dict, tree) = sampled(domain, seed);
        let tokens = tokenize(&tree);
        prop_assert_eq!(tokens.len(), tree.node_count() + tree.leaf_count());
        prop_assert_eq!(detokenize(&tokens, &dict).unwrap(), tree);
    }

    #[test]
    fn lexical_init_then_discretize_is_identity(domain in domain_strategy(), seed in any::<u64>()) {
        let (dict, tree) = sampled(domain, seed);
        let ddt = init_from_lexical::<f64>(&tree, &dict, &InitConfig::default()).unwrap();
        let (_, back) = ddt.discretize_to_tree(&dict).unwrap();
        prop_assert_eq!(back.without_annotations(), tree.clone());
        let mut found = Vec::new();
        thresholds(&back.root, &mut found);
        for (predicate, threshold) in found {
            let expected = dict.decision(&predicate).unwrap().threshold;
            prop_assert!((threshold.unwrap() - expected).abs() < 1e-9, "{predicate}: {threshold:?}");
        }
    }

    #[test]
    fn annotated_trees_survive_serialization(domain in domain_strategy(), seed in any::<u64>()) {
        let (obs, acts) = dims(domain);
        let dict = PredicateDictionary::for_domain(domain);
        let soft = random_soft_ddt(obs, acts, 10, &mut rng(seed));
        let (_, tree) = soft.discretize_to_tree(&dict).unwrap();
        prop_assert_eq!(deserialize(&serialize(&tree)).unwrap(), tree.clone());
        if validate(&tree, &dict).is_ok() {
            prop_assert_eq!(parse_dsl(&render_program(&tree, &dict), &dict).unwrap(), tree);
        }
    }

    #[test]
    fn policy_files_round_trip(domain in domain_strategy(), seed in any::<u64>()) {
        let (obs, acts) = dims(domain);
        let model = PolicyModel::Ddt(random_soft_ddt(obs, acts, 10, &mut rng(seed)));
        let text = serde_json::to_string(&model).unwrap();
        let back: PolicyModel = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
