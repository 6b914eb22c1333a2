use proptest::prelude::*;
use ramsey_mts::hst::random_hst;
use ramsey_mts::metric::random_metric;
use ramsey_mts::rng::rng_from_seed;
use ramsey_mts::HstTree;

fn tree(seed: u64, leaves: usize) -> HstTree {
    random_hst(leaves, 4, 2.0, &mut rng_from_seed(seed))
}

fn same_distances(a: &HstTree, b: &HstTree) -> bool {
    let (ma, mb) = (a.to_metric().unwrap(), b.to_metric().unwrap());
    let ids = ma.points().to_vec();
    let mb = mb.restrict(&ids).unwrap();
    (0..ids.len()).all(|i| (0..ids.len()).all(|j| ma.d(i, j) == mb.d(i, j)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_roundtrip(seed in any::<u64>(), leaves in 1usize..40) {
        let t = tree(seed, leaves);
        let back = HstTree::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), t.to_json());
        prop_assert!(same_distances(&t, &back));
    }

    #[test]
    fn remove_degenerate_keeps_distances(seed in any::<u64>(), leaves in 2usize..40, keep in 1usize..40) {
        let t = tree(seed, leaves);
        let ids = t.leaf_ids();
        let chosen: Vec<&String> = ids.iter().take(keep.min(ids.len())).collect();
        let sub = t.induced(&chosen).unwrap();
        let flat = sub.remove_degenerate();
        prop_assert!(flat.nodes().iter().all(|n| n.children.len() != 1));
        prop_assert_eq!(flat.leaf_count(), chosen.len());
        prop_assert!(same_distances(&sub, &flat));
    }

    #[test]
    fn to_ell_hst_is_ell_hst_above(seed in any::<u64>(), leaves in 2usize..40, ell in 1.5f64..6.0) {
        let t = tree(seed, leaves);
        let c = t.to_ell_hst(ell).unwrap();
        prop_assert!(c.is_khst(ell));
        let rep = c.to_metric().unwrap().approximation_factor(&t.to_metric().unwrap().restrict(&c.leaf_ids()).unwrap()).unwrap();
        prop_assert!(rep.dominated);
        prop_assert!(rep.alpha <= ell * (1.0 + 1e-9));
    }

    #[test]
    fn subdominant_ultrametric_is_below(seed in any::<u64>(), n in 2usize..30) {
        let m = random_metric(n, 10.0, &mut rng_from_seed(seed));
        let u = HstTree::subdominant_ultrametric(&m).to_metric().unwrap().restrict(m.points()).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!(u.d(i, j) <= m.d(i, j) * (1.0 + 1e-12));
                for k in 0..n {
                    prop_assert!(u.d(i, j) <= u.d(i, k).max(u.d(k, j)) * (1.0 + 1e-12));
                }
            }
        }
    }
}

#[test]
fn complete_tree_classifies() {
    let t = HstTree::complete(3, 2, 9.0, 1.0 / 3.0);
    assert_eq!(t.leaf_count(), 9);
    assert!(t.is_khst(3.0));
    assert!(!t.is_khst(3.5));
    let m = t.to_metric().unwrap();
    assert_eq!(m.diameter().0, 9.0);
}
