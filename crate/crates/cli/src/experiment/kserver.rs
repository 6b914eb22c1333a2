use super::{Experiment, ExperimentConfig, Outcome};
use crate::report::Check;
use num_rational::BigRational;
use ramsey_mts::hst::random_hst;
use ramsey_mts::kserver::{run_reduction, server_algorithm, verify_relation};
use ramsey_mts::mts::Task;
use ramsey_mts::rng::{derive_seed, trial_rng, Rng};
use ramsey_mts::{MetricSpace, Result};
use rand::Rng as _;
use serde_json::json;

/// Integer metric on `n` points with every distance in `[k, 2k]`.
pub fn integer_metric(n: usize, k: u32, rng: &mut Rng) -> Result<MetricSpace> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.gen_range(k..=2 * k) as f64;
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    MetricSpace::validate(&d, (0..n).map(|i| i.to_string()).collect(), 0.0)
}

/// Uniform points, costs in quarter units up to twice the diameter.
pub fn random_tau(m: &MetricSpace, len: usize, rng: &mut Rng) -> Vec<Task> {
    let top = (8.0 * m.diameter().0).ceil().max(1.0) as u32;
    (0..len)
        .map(|_| Task::new(rng.gen_range(0..m.len()), rng.gen_range(0..=top) as f64 / 4.0))
        .collect()
}

/// Each task sits exactly on the request threshold `min_{j≠i} w(j) + d(j,i) − w(i)` of the offline
/// work function, or one unit above it. Needs integer distances.
pub fn threshold_tau(m: &MetricSpace, start: usize, len: usize, rng: &mut Rng) -> Vec<Task> {
    let n = m.len();
    let d = |i: usize, j: usize| m.d(i, j) as i64;
    let mut w: Vec<i64> = (0..n).map(|i| d(start, i)).collect();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let i = rng.gen_range(0..n);
        let reach = (0..n).filter(|&j| j != i).map(|j| w[j] + d(j, i)).min().unwrap_or(0);
        let cost = (reach - w[i]).max(0) + i64::from(rng.gen_bool(0.25));
        w[i] = (w[i] + cost).min(reach);
        out.push(Task::new(i, cost as f64));
    }
    out
}

/// The MTS-to-K-server reduction in exact rationals on 3–5 point spaces.
pub struct KserverLb;

impl Experiment for KserverLb {
    fn name(&self) -> &'static str {
        "kserver-lb"
    }

    fn summary(&self) -> &'static str {
        "run_reduction -> verify_relation on random and threshold task sequences (params: adversarial, algorithms, max_len)"
    }

    fn execute(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let random = cfg.trials.unwrap_or(500);
        let adversarial = cfg.param("adversarial", 100usize)?;
        let max_len = cfg.param("max_len", 40usize)?;
        let names = cfg.list("algorithms", &["greedy".to_string(), "balance".to_string()])?;
        let algs = names.iter().map(|a| server_algorithm(a)).collect::<Result<Vec<_>>>()?;
        let mut runs = Vec::new();
        let (mut dom, mut ledger, mut fin) = (0usize, 0usize, 0usize);
        let mut first = None;
        for i in 0..random + adversarial {
            let mut rng = trial_rng(cfg.seed, i as u64);
            let n = 3 + i % 3;
            let threshold = i >= random;
            let (source, m) = if threshold || i % 2 == 0 {
                ("integer", integer_metric(n, 4, &mut rng)?)
            } else {
                let mut t = random_hst(n, 3, 2.0, &mut rng);
                while t.leaf_count() < 2 {
                    t = random_hst(n, 3, 2.0, &mut rng);
                }
                ("hst", t.to_metric()?)
            };
            let start = rng.gen_range(0..m.len());
            let len = rng.gen_range(1..=max_len.max(1));
            let tau = if threshold {
                threshold_tau(&m, start, len, &mut rng)
            } else {
                random_tau(&m, len, &mut rng)
            };
            for (a, alg) in algs.iter().enumerate() {
                let mut arng = trial_rng(derive_seed(cfg.seed, i as u64), a as u64);
                let trace = run_reduction::<BigRational>(&**alg, &m, &tau, start, &mut arng)?;
                let rep = verify_relation(&trace, 0.0);
                dom += rep.domination_violations;
                ledger += rep.ledger_violations;
                fin += usize::from(!rep.final_ok);
                if let Some((k, what)) = &rep.first_violation {
                    first.get_or_insert_with(|| format!("tau {i} ({}), step {k}: {what}", alg.name()));
                }
                runs.push(json!({
                    "tau": i,
                    "kind": if threshold { "threshold" } else { "random" },
                    "metric": source,
                    "points": m.len(),
                    "algorithm": alg.name(),
                    "steps": rep.steps,
                    "requests": rep.requests,
                    "cost_t": rep.cost_t,
                    "cost_s": rep.cost_s,
                    "opt_t": rep.opt_t,
                    "ok": rep.ok(),
                }));
            }
        }
        let detail = first.clone().unwrap_or_else(|| "none".into());
        let checks = vec![
            Check::new("server_work_dominated", dom == 0, format!("{dom} violations; first: {detail}")),
            Check::new("local_cost_ledger", ledger == 0, format!("{ledger} violations")),
            Check::new("final_cost_relation", fin == 0, format!("{fin} violations")),
        ];
        let requests: usize = runs.iter().map(|r| r["requests"].as_u64().unwrap_or(0) as usize).sum();
        Ok(Outcome {
            trials: Some(random),
            aggregate: json!({
                "random_sequences": random,
                "threshold_sequences": adversarial,
                "algorithms": names,
                "traces": runs.len(),
                "requests": requests,
            }),
            runs,
            checks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ramsey_mts::rng::rng_from_seed;

    #[test]
    fn threshold_tau_hits_threshold() {
        let mut rng = rng_from_seed(3);
        let m = integer_metric(4, 4, &mut rng).unwrap();
        let tau = threshold_tau(&m, 0, 30, &mut rng);
        assert_eq!(tau.len(), 30);
        assert!(tau.iter().all(|t| t.cost >= 0.0 && t.cost.fract() == 0.0));
        for i in 0..4 {
            for j in 0..4 {
                let d = m.d(i, j);
                assert!(i == j || (4.0..=8.0).contains(&d));
            }
        }
    }
}
