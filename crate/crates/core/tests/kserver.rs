use num_rational::BigRational;
use proptest::prelude::*;
use ramsey_mts::hst::random_hst;
use ramsey_mts::kserver::{kserver_opt_bruteforce, run_reduction, server_algorithm, server_opt, verify_relation, SERVER_ALGORITHMS};
use ramsey_mts::mts::Task;
use ramsey_mts::rng::rng_from_seed;
use ramsey_mts::MetricSpace;

fn small_metric(seed: u64, n: usize) -> MetricSpace {
    let t = random_hst(n, 3, 2.0, &mut rng_from_seed(seed));
    let m = t.to_metric().unwrap();
    if m.len() >= 2 {
        m
    } else {
        ramsey_mts::metric::path(n.max(2), 1.0).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_relation_holds(
        seed in any::<u64>(),
        n in 2usize..6,
        raw in proptest::collection::vec((0usize..6, 0u32..24), 0..30),
    ) {
        let m = small_metric(seed, n);
        let tau: Vec<Task> = raw.iter().map(|&(p, c)| Task::new(p % m.len(), c as f64 / 2.0)).collect();
        for name in SERVER_ALGORITHMS {
            let alg = server_algorithm(name).unwrap();
            let trace = run_reduction::<BigRational>(&*alg, &m, &tau, 0, &mut rng_from_seed(seed)).unwrap();
            let rep = verify_relation(&trace, 0.0);
            prop_assert!(rep.ok(), "{name}: {:?}", rep.first_violation);
            prop_assert!(rep.cost_t >= rep.opt_t - 1e-9);
        }
    }

    #[test]
    fn server_opt_matches_bruteforce(
        seed in any::<u64>(),
        n in 2usize..6,
        hole in 0usize..6,
        reqs in proptest::collection::vec(0usize..6, 0..12),
    ) {
        let m = small_metric(seed, n);
        let n = m.len();
        let hole = hole % n;
        let reqs: Vec<usize> = reqs.into_iter().map(|r| r % n).collect();
        let start: Vec<usize> = (0..n).filter(|&i| i != hole).collect();
        let dp = server_opt::<f64>(&m, &reqs, hole).unwrap();
        let bf = kserver_opt_bruteforce(&m, &start, &reqs).unwrap();
        prop_assert!((dp - bf).abs() <= 1e-9 * bf.max(1.0), "dp {} vs brute force {}", dp, bf);
    }
}
