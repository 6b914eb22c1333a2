use super::AdversarySpec;
use crate::error::{param, Result};
use crate::mts::{opt_costs, run_online, OnlineAlgorithm};
use crate::rng::{derive_seed, trial_rng};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub mean: f64,
    pub half_width: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn from_samples(xs: &[f64]) -> Interval {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let half_width = Z99 * (var / n).sqrt();
        Interval {
            mean,
            half_width,
            lo: mean - half_width,
            hi: mean + half_width,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StartStats {
    pub u0: usize,
    pub opt0: Interval,
    pub costs: Vec<Interval>,
}

/// `consistent`: no start point refutes `E[cost] ≥ rβΔ` at 99%; `cleared`: every start
/// point's interval lies above it.
#[derive(Clone, Debug, Serialize)]
pub struct AlgorithmVerdict {
    pub name: String,
    pub worst_u0: usize,
    pub cost: Interval,
    pub consistent: bool,
    pub cleared: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub trials: usize,
    pub seed: u64,
    pub mean_length: f64,
    pub beta_delta: f64,
    pub r_beta_delta: f64,
    /// Start point with the smallest mean `opt⁰`.
    pub best_u0: usize,
    pub opt0: Interval,
    /// Some start point does not refute `E[opt⁰] ≤ βΔ` at 99%.
    pub opt0_consistent: bool,
    /// Some start point's whole interval lies below `βΔ`.
    pub opt0_cleared: bool,
    pub algorithms: Vec<AlgorithmVerdict>,
    pub starts: Vec<StartStats>,
}

impl RatioReport {
    pub fn passed(&self) -> bool {
        self.opt0_consistent && self.algorithms.iter().all(|a| a.consistent)
    }

    pub fn cleared(&self) -> bool {
        self.opt0_cleared && self.algorithms.iter().all(|a| a.cleared)
    }
}

fn starts(n: usize, max: usize) -> Vec<usize> {
    if n <= max {
        (0..n).collect()
    } else {
        (0..max).map(|i| i * n / max).collect()
    }
}

/// Monte Carlo estimate of `E[opt⁰]` and each algorithm's `E[cost]` from up to `max_starts`
/// start points. Every trial shares one sampled sequence across starts and algorithms.
pub fn estimate_ratio(
    adv: &AdversarySpec,
    algs: &[Arc<dyn OnlineAlgorithm>],
    trials: usize,
    seed: u64,
    max_starts: usize,
) -> Result<RatioReport> {
    if trials == 0 {
        return param("trials must be at least 1");
    }
    if max_starts == 0 {
        return param("max_starts must be at least 1");
    }
    let u = &adv.umts;
    let us = starts(u.len(), max_starts);
    let na = algs.len();
    let width = 1 + na;
    let rows: Vec<(usize, Vec<f64>)> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(usize, Vec<f64>)> {
            let seq = adv.sample(&mut trial_rng(seed, i as u64));
            let sub = derive_seed(seed, i as u64);
            let mut row = Vec::with_capacity(us.len() * width);
            for (s, &u0) in us.iter().enumerate() {
                row.push(opt_costs::<f64>(&u.metric, &seq, u0)?.1);
                for (a, alg) in algs.iter().enumerate() {
                    let mut rng = trial_rng(sub, (s * na + a) as u64 + 1);
                    row.push(run_online(&**alg, u, &seq, u0, &mut rng)?.total);
                }
            }
            Ok((seq.len(), row))
        })
        .collect::<Result<_>>()?;
    let column = |c: usize| -> Vec<f64> { rows.iter().map(|(_, r)| r[c]).collect() };
    let start_stats: Vec<StartStats> = us
        .iter()
        .enumerate()
        .map(|(s, &u0)| StartStats {
            u0,
            opt0: Interval::from_samples(&column(s * width)),
            costs: (0..na).map(|a| Interval::from_samples(&column(s * width + 1 + a))).collect(),
        })
        .collect();
    let beta_delta = adv.beta * adv.delta;
    let r_beta_delta = adv.r * beta_delta;
    let slack = |x: f64| 1e-9 * x.abs().max(1.0);
    let best = start_stats
        .iter()
        .min_by(|a, b| a.opt0.mean.total_cmp(&b.opt0.mean))
        .expect("at least one start");
    let algorithms = algs
        .iter()
        .enumerate()
        .map(|(a, alg)| {
            let worst = start_stats
                .iter()
                .min_by(|x, y| x.costs[a].mean.total_cmp(&y.costs[a].mean))
                .expect("at least one start");
            AlgorithmVerdict {
                name: alg.name().to_string(),
                worst_u0: worst.u0,
                cost: worst.costs[a],
                consistent: start_stats.iter().all(|s| s.costs[a].hi >= r_beta_delta - slack(r_beta_delta)),
                cleared: start_stats.iter().all(|s| s.costs[a].lo >= r_beta_delta - slack(r_beta_delta)),
            }
        })
        .collect();
    Ok(RatioReport {
        trials,
        seed,
        mean_length: rows.iter().map(|(l, _)| *l as f64).sum::<f64>() / trials as f64,
        beta_delta,
        r_beta_delta,
        best_u0: best.u0,
        opt0: best.opt0,
        opt0_consistent: start_stats.iter().any(|s| s.opt0.lo <= beta_delta + slack(beta_delta)),
        opt0_cleared: start_stats.iter().any(|s| s.opt0.hi <= beta_delta + slack(beta_delta)),
        algorithms,
        starts: start_stats,
    })
}
