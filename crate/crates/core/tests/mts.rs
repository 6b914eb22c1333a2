use num_rational::BigRational;
use proptest::prelude::*;
use ramsey_mts::metric::random_metric;
use ramsey_mts::mts::{
    builtin_algorithm, builtin_algorithms, expectimax_online_opt, opt_costs, run_online, Task, Umts, WorkFunction,
};
use ramsey_mts::rng::rng_from_seed;
use ramsey_mts::MetricSpace;

fn tasks(n: usize) -> impl Strategy<Value = Vec<Task>> {
    proptest::collection::vec((0..n, 0u32..40), 0..30)
        .prop_map(|v| v.into_iter().map(|(p, c)| Task::new(p, c as f64 / 4.0)).collect())
}

fn integer_metric(seed: u64, n: usize) -> MetricSpace {
    let m = random_metric(n, 6.0, &mut rng_from_seed(seed));
    let mut d: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.d(i, j).round()).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    MetricSpace::validate(&d, (0..n).map(|i| i.to_string()).collect(), 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn work_function_stays_lipschitz(seed in any::<u64>(), seq in tasks(6), u0 in 0usize..6) {
        let m = integer_metric(seed, 6);
        let mut w = WorkFunction::<f64>::new(&m, u0).unwrap();
        let mut last = w.opt();
        for t in &seq {
            w.update(&m, t);
            prop_assert!(w.is_lipschitz(&m, 1e-12));
            prop_assert!(w.opt() >= last);
            last = w.opt();
        }
        let opt0 = w.opt0(&m);
        prop_assert!(w.opt() <= opt0);
        prop_assert!(opt0 <= w.opt() + m.diameter().0);
    }

    #[test]
    fn exact_and_float_optima_agree(seed in any::<u64>(), seq in tasks(5), u0 in 0usize..5) {
        let m = integer_metric(seed, 5);
        let (a, b) = opt_costs::<f64>(&m, &seq, u0).unwrap();
        let (x, y) = opt_costs::<BigRational>(&m, &seq, u0).unwrap();
        prop_assert_eq!(BigRational::from_float(a).unwrap(), x);
        prop_assert_eq!(BigRational::from_float(b).unwrap(), y);
    }

    #[test]
    fn online_never_beats_opt(seed in any::<u64>(), seq in tasks(5), u0 in 0usize..5) {
        let m = integer_metric(seed, 5);
        let opt = opt_costs::<f64>(&m, &seq, u0).unwrap().0;
        let u = Umts::fair(m);
        for alg in builtin_algorithms() {
            let rep = run_online(&*alg, &u, &seq, u0, &mut rng_from_seed(seed)).unwrap();
            prop_assert!(rep.total >= opt - 1e-9, "{} paid {} < opt {}", alg.name(), rep.total, opt);
            prop_assert!((rep.total - rep.moving - rep.local).abs() <= 1e-9 * rep.total.max(1.0));
        }
    }

    #[test]
    fn expectimax_between_opt_and_deterministic(
        seed in any::<u64>(),
        seqs in proptest::collection::vec(tasks(3).prop_map(|mut s| { s.truncate(4); s }), 1..4),
    ) {
        let m = integer_metric(seed, 3);
        let u = Umts::fair(m.clone());
        let p = 1.0 / seqs.len() as f64;
        let dist: Vec<(f64, Vec<Task>)> = seqs.iter().map(|s| (p, s.clone())).collect();
        let best = expectimax_online_opt(&dist, &u, 0).unwrap();
        let mean_opt: f64 = seqs.iter().map(|s| p * opt_costs::<f64>(&m, s, 0).unwrap().0).sum();
        prop_assert!(best >= mean_opt - 1e-9);
        for name in ["stay_put", "wfa_like"] {
            let alg = builtin_algorithm(name).unwrap();
            let mean: f64 = seqs
                .iter()
                .map(|s| p * run_online(&*alg, &u, s, 0, &mut rng_from_seed(0)).unwrap().total)
                .sum();
            prop_assert!(best <= mean + 1e-9, "{name}: {mean} < {best}");
        }
    }
}

#[test]
fn unfair_costs_are_inflated() {
    let m = integer_metric(1, 3);
    let fair = Umts::fair(m.clone());
    let unfair = Umts::new(m, vec![3.0, 2.0, 1.0], 1.0).unwrap();
    let seq: Vec<Task> = (0..9).map(|i| Task::new(i % 3, 1.0)).collect();
    let alg = builtin_algorithm("stay_put").unwrap();
    let a = run_online(&*alg, &fair, &seq, 0, &mut rng_from_seed(0)).unwrap();
    let b = run_online(&*alg, &unfair, &seq, 0, &mut rng_from_seed(0)).unwrap();
    assert_eq!((a.local, b.local), (3.0, 9.0));
}
