use proptest::prelude::*;
use ramsey_mts::adversary::{
    child_blocks, composed_uniform_adversary, fair_uniform_adversary, flexible_fair, hst_adversary,
    unfair_uniform_adversary, Constants,
};
use ramsey_mts::hst::random_hst;
use ramsey_mts::mts::opt_costs;
use ramsey_mts::rng::{rng_from_seed, trial_rng};
use ramsey_mts::HstTree;

fn ratios() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(1.0f64..20.0, 2..6).prop_map(|mut v| {
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn uniform_samples_well_formed(seed in any::<u64>(), r in ratios(), delta in 0.5f64..8.0) {
        let c = Constants::aggressive();
        for adv in [
            unfair_uniform_adversary(delta, &r, &c).unwrap(),
            composed_uniform_adversary(delta, &r, &c).unwrap(),
            fair_uniform_adversary(r.len(), delta).unwrap(),
        ] {
            let seq = adv.sample(&mut rng_from_seed(seed));
            prop_assert!(adv.check_sample(&seq).is_ok());
            prop_assert!(adv.r > 0.0 && adv.beta > 0.0);
        }
    }

    #[test]
    fn fair_opt0_at_most_two_delta(seed in any::<u64>(), b in 2usize..9, delta in 0.5f64..8.0) {
        let adv = fair_uniform_adversary(b, delta).unwrap();
        let seq = adv.sample(&mut trial_rng(seed, 0));
        prop_assert_eq!(seq.len(), b * (b + 1) / 2);
        let best = (0..b).map(|u0| opt_costs::<f64>(&adv.umts.metric, &seq, u0).unwrap().1).fold(f64::INFINITY, f64::min);
        prop_assert!(best <= 2.0 * delta * (1.0 + 1e-12));
    }

    #[test]
    fn flexible_members_span_range(b in 2usize..8, t in 0.0f64..=1.0) {
        let f = flexible_fair(b, 1.0).unwrap();
        let (lo, hi) = f.range();
        let m = f.member(lo + t * (hi - lo)).unwrap();
        prop_assert!((m.beta - (lo + t * (hi - lo))).abs() <= 1e-9 * hi);
        let seq = m.sample(&mut rng_from_seed(b as u64));
        prop_assert!(m.check_sample(&seq).is_ok());
    }

    #[test]
    fn child_blocks_integral(eta in 0.05f64..0.95, alpha in 0.01f64..4.0, beta_j in 1.0f64..40.0, delta_j in 0.1f64..10.0, slack in 1.0f64..100.0) {
        let delta = delta_j * eta / (1.0 - eta) * beta_j / alpha * slack;
        let (t, bp) = child_blocks(alpha, delta, beta_j, delta_j, eta).unwrap();
        prop_assert!(t >= 1);
        prop_assert!(bp > eta * beta_j && bp <= beta_j);
        prop_assert!((t as f64 * bp * delta_j - alpha * delta).abs() <= 1e-9 * alpha * delta);
    }

    #[test]
    fn combined_members_on_random_trees(seed in any::<u64>(), leaves in 2usize..12, pick in 0.0f64..=1.0) {
        let t = random_hst(leaves, 3, 1e3, &mut rng_from_seed(seed));
        prop_assume!(t.leaf_count() >= 2);
        let adv = hst_adversary(&t, &Constants::aggressive(), false).unwrap();
        let (lo, hi) = adv.family.range();
        let m = adv.family.member(lo + pick * (hi - lo)).unwrap();
        if let (Some(ts), Some(bs)) = (m.params["t"].as_array(), m.params["beta_child"].as_array()) {
            for (t, b) in ts.iter().zip(bs) {
                prop_assert!(t.is_null() || t.as_u64().is_some_and(|t| t >= 1));
                prop_assert!(b.is_null() || b.as_f64().is_some_and(|b| b > 0.0));
            }
        }
        prop_assert!(m.r > 0.0 && m.beta > 0.0);
    }
}

#[test]
fn two_level_family_reports_children() {
    let adv = hst_adversary(&HstTree::complete(2, 2, 64.0, 1.0 / 64.0), &Constants::aggressive(), false).unwrap();
    let kids = adv.family.params["children"].as_array().unwrap();
    assert_eq!(kids.len(), 2);
    assert!(kids.iter().all(|k| k["beta"].as_f64().is_some_and(|b| b > 0.0)));
    let m = adv.member().unwrap();
    assert_eq!(m.params["t"].as_array().map(Vec::len), Some(2));
    let seq = m.sample(&mut rng_from_seed(5));
    assert!(!seq.is_empty());
    m.check_sample(&seq).unwrap();
}
