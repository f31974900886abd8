mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use treepolicy::corpus::sample_tree;
use treepolicy::ddt::{init_from_lexical, InitConfig};
use treepolicy::tree::{Domain, PredicateDictionary};

fn domain_strategy() -> impl Strategy<Value = Domain> {
    prop_oneof![Just(Domain::Taxi), Just(Domain::Highway)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn forward_matches_path_enumeration(domain in domain_strategy(), seed in any::<u64>()) {
        let (obs, acts) = dims(domain);
        let mut r = rng(seed);
        let ddt = random_soft_ddt(obs, acts, 12, &mut r);
        for _ in 0..5 {
            let x = random_input(obs, &mut r);
            let got = ddt.forward(&x).unwrap().probs;
            let want = path_enumeration(&ddt, &x);
            for (g, w) in got.iter().zip(&want) {
                prop_assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
            }
            prop_assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(got.iter().all(|p| *p >= 0.0));
        }
    }

    #[test]
    fn leaf_weights_form_a_distribution(domain in domain_strategy(), seed in any::<u64>()) {
        let (obs, acts) = dims(domain);
        let mut r = rng(seed);
        let ddt = random_soft_ddt(obs, acts, 12, &mut r);
        let w = ddt.leaf_weights(&random_input(obs, &mut r)).unwrap();
        prop_assert_eq!(w.len(), ddt.leaves().len());
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences(domain in domain_strategy(), seed in any::<u64>()) {
        let (obs, acts) = dims(domain);
        let mut r = rng(seed);
        let ddt = random_soft_ddt(obs, acts, 8, &mut r);
        let x = random_input(obs, &mut r);
        let action = r.gen_range(0..acts);
        let (lp, grad) = ddt.log_prob_and_grads(&x, action).unwrap();
        prop_assert!((lp - path_enumeration(&ddt, &x)[action].ln()).abs() < 1e-12);
        let fd = finite_difference_grad(&ddt, &x, action, 1e-3);
        let err = max_relative_error(&grad.flat(), &fd, 1e-6);
        prop_assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn discretized_tree_acts_like_crisp_walk(domain in domain_strategy(), seed in any::<u64>()) {
        let (obs, acts) = dims(domain);
        let dict = PredicateDictionary::for_domain(domain);
        let mut r = rng(seed);
        let soft = random_soft_ddt(obs, acts, 12, &mut r);
        let (hard, lexical) = soft.discretize_to_tree(&dict).unwrap();
        for _ in 0..10 {
            let x = random_input(obs, &mut r);
            let want = crisp_action(&hard, &x);
            prop_assert_eq!(hard.forward(&x).unwrap().argmax(), want);
            prop_assert_eq!(dict.action_index(lexical.act(&x, &dict).unwrap()), Some(want));
        }
    }

    #[test]
    fn discretizing_twice_changes_nothing(domain in domain_strategy(), seed in any::<u64>()) {
        let (obs, acts) = dims(domain);
        let mut r = rng(seed);
        let once = random_soft_ddt(obs, acts, 12, &mut r).discretize();
        prop_assert_eq!(once.discretize(), once);
    }

    #[test]
    fn sharp_lexical_init_agrees_with_crisp_tree(domain in domain_strategy(), seed in any::<u64>()) {
        let dict = PredicateDictionary::for_domain(domain);
        let mut r = rng(seed);
        let tree = sample_tree(&dict, (1, 4), &mut r);
        let cfg = InitConfig { alpha: 1e4, ..InitConfig::default() };
        let ddt = init_from_lexical::<f64>(&tree, &dict, &cfg).unwrap();
        for _ in 0..10 {
            let x = random_input(dict.obs_dim(), &mut r);
            // keep clear of decision boundaries, where a finite sharpness is still soft
            if ddt.decision_probs(&x).unwrap().iter().any(|p| *p > 1e-6 && *p < 1.0 - 1e-6) {
                continue;
            }
            let crisp = dict.action_index(tree.act(&x, &dict).unwrap()).unwrap();
            prop_assert_eq!(ddt.forward(&x).unwrap().argmax(), crisp);
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let mut r = rng(7);
    for _ in 0..50 {
        let ddt = random_soft_ddt(4, 3, 6, &mut r);
        let x = random_input(4, &mut r);
        let narrow = ddt.cast::<f32>();
        let xs: Vec<f32> = x.iter().map(|v| *v as f32).collect();
        let lo = narrow.forward(&xs).unwrap().probs;
        let hi = ddt.forward(&x).unwrap().probs;
        for (a, b) in lo.iter().zip(&hi) {
            assert!((*a as f64 - b).abs() < 1e-5);
        }
    }
}
