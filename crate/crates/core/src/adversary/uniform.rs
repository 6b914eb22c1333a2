use super::{AdversarySpec, Constants, EmptySampler, FairSampler, IidSampler};
use crate::error::{param, Error, Result};
use crate::metric::uniform;
use crate::mts::{Distribution, Task, Umts};
use crate::scalar::Scalar;
use crate::ramsey::{select_branching_log, Branching};
use serde_json::json;
use std::sync::Arc;

const MAX_TASKS: usize = 10_000_000;

pub fn harmonic(b: usize) -> f64 {
    (1..=b).map(|i| 1.0 / i as f64).sum()
}

/// `ρ·ln Σ e^{r_i/ρ}`, evaluated without overflow.
pub fn log_sum_exp_claim(r: &[f64], rho: f64) -> f64 {
    let top = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + rho * r.iter().map(|&x| ((x - top) / rho).exp()).sum::<f64>().ln()
}

/// `r_i = scale·(1 + ln n_i)`.
pub fn ratios_from_sizes(sizes: &[f64], scale: f64) -> Result<Vec<f64>> {
    if sizes.is_empty() {
        return param("size list must be nonempty");
    }
    if sizes.iter().any(|&n| !(n >= 1.0 && n.is_finite())) {
        return param("sizes must be finite and at least 1");
    }
    if (1..sizes.len()).any(|i| sizes[i] > sizes[i - 1]) {
        return param("sizes must be non-increasing");
    }
    Ok(sizes.iter().map(|n| scale * (1.0 + n.ln())).collect())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return param(format!("diameter must be positive, got {delta}"));
    }
    Ok(())
}

fn check_ratios(r: &[f64], min: f64) -> Result<()> {
    if r.len() < 2 {
        return param("a uniform adversary needs at least 2 points");
    }
    if r.iter().any(|&x| !(x.is_finite() && x >= min && x > 0.0)) {
        return param(format!("cost ratios must be finite and at least {min}"));
    }
    if let Some(i) = (1..r.len()).find(|&i| r[i] > r[i - 1]) {
        return param(format!("cost ratios must be non-increasing (entry {i} increases)"));
    }
    Ok(())
}

/// No tasks at all; `r = 1` by convention.
pub fn empty_adversary(umts: Umts) -> AdversarySpec {
    let delta = umts.metric.diameter().0;
    AdversarySpec::new("empty", umts, delta, 1.0, 0.0, Arc::new(EmptySampler))
}

pub(crate) fn fair_on(umts: Umts, delta: f64, gamma: f64) -> AdversarySpec {
    let b = umts.len();
    let rmin = umts.cost_ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let beta = 2.0 * gamma;
    let r = rmin.min(1.0) * harmonic(b) / beta;
    let mut spec = AdversarySpec::new("fair", umts, delta, r, beta, Arc::new(FairSampler { b, cost: gamma * delta }));
    spec.alpha = vec![gamma; b];
    spec.params = json!({"tasks": b * (b + 1) / 2});
    spec
}

/// Random-permutation prefixes on the `b`-point uniform space: `(H_b/2, 2; 1,…,1)`.
pub fn fair_uniform_adversary(b: usize, delta: f64) -> Result<AdversarySpec> {
    if b < 2 {
        return param(format!("fair adversary needs b >= 2, got {b}"));
    }
    check_delta(delta)?;
    Ok(fair_on(Umts::fair(uniform(b, delta)?), delta, 1.0))
}

/// All `b!` equally likely sequences of the fair adversary, for exact evaluation (`b ≤ 8`).
pub fn fair_distribution<S: Scalar>(b: usize, delta: f64) -> Result<Distribution<S>> {
    if !(2..=8).contains(&b) {
        return param(format!("exact fair distribution needs 2 <= b <= 8, got {b}"));
    }
    check_delta(delta)?;
    let count: u64 = (1..=b as u64).product();
    let p = S::from_u64(1) / S::from_u64(count);
    let mut out = Vec::with_capacity(count as usize);
    let mut pi: Vec<usize> = (0..b).collect();
    heap_permutations(&mut pi, b, &mut |perm| {
        let seq = (1..=b).flat_map(|i| perm[..i].iter().map(|&v| Task::new(v, delta))).collect();
        out.push((p.clone(), seq));
    });
    Ok(out)
}

fn heap_permutations(a: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k <= 1 {
        f(a);
        return;
    }
    for i in 0..k {
        heap_permutations(a, k - 1, f);
        let j = if k % 2 == 0 { i } else { 0 };
        if i + 1 < k {
            a.swap(j, k - 1);
        }
    }
}

/// I.i.d. tasks `(v_i, Δ/r_i)` over all `b` points; length and claim set by the selected branch.
pub fn unfair_uniform_adversary(delta: f64, ratios: &[f64], c: &Constants) -> Result<AdversarySpec> {
    check_ratios(ratios, 1.0)?;
    let b = ratios.len() as f64;
    if ratios[0] < 0.25 * b.ln() {
        return param(format!("r_1 = {} is below ln(b)/4 = {}", ratios[0], 0.25 * b.ln()));
    }
    unfair_impl(delta, ratios, c)
}

fn unfair_impl(delta: f64, ratios: &[f64], c: &Constants) -> Result<AdversarySpec> {
    check_delta(delta)?;
    c.validate()?;
    let b = ratios.len();
    let branch = select_branching_log(ratios, c.rho)?;
    let (mu_tilde, delta1) = match branch {
        Branching::Equal(l) => {
            let rl = ratios[l - 1];
            let lnl = (l as f64).ln();
            (16.0 * rl * rl * c.lambda2 / lnl, lnl / (4.0 * c.lambda2 * rl))
        }
        Branching::Binary => {
            let (r1, r2) = (ratios[0], ratios[1]);
            let gap = r1 - r2 + 1.0 / (20.0 * c.lambda2);
            (4.0 * r1 * r1 / gap, gap / r1)
        }
    };
    let mu = mu_tilde.ceil();
    if !(mu * b as f64 <= MAX_TASKS as f64) {
        return Err(Error::Budget(format!("sequence length {} exceeds {MAX_TASKS}", mu * b as f64)));
    }
    let mu = mu as usize;
    let m = mu * b;
    let r = log_sum_exp_claim(ratios, c.rho);
    let beta = mu as f64 / r;
    let alpha: Vec<f64> = ratios.iter().map(|x| 1.0 / x).collect();
    let costs = alpha.iter().map(|a| a * delta).collect();
    let umts = Umts::new(uniform(b, delta)?, ratios.to_vec(), 1.0)?;
    let mut spec = AdversarySpec::new("unfair", umts, delta, r, beta, Arc::new(IidSampler { m, costs }));
    spec.alpha = alpha;
    spec.params = json!({
        "branch": match branch { Branching::Binary => "binary".to_string(), Branching::Equal(l) => format!("equal({l})") },
        "mu_tilde": mu_tilde,
        "mu": mu,
        "m": m,
        "delta1": delta1,
    });
    Ok(spec)
}

/// Fair adversary when `r₁ ≤ ¼ ln b`, unfair otherwise; claims `r = ρ(1 + ln Σ n_i)`
/// with `r_i = ρ(1 + ln n_i)`. Ratios below 1 are accepted and weaken the fair claim.
pub fn composed_uniform_adversary(delta: f64, ratios: &[f64], c: &Constants) -> Result<AdversarySpec> {
    check_ratios(ratios, 0.0)?;
    check_delta(delta)?;
    c.validate()?;
    let b = ratios.len();
    let formula = log_sum_exp_claim(ratios, c.rho);
    let mut spec = if ratios[0] <= 0.25 * (b as f64).ln() {
        let umts = Umts::new(uniform(b, delta)?, ratios.to_vec(), 1.0)?;
        let mut s = fair_on(umts, delta, 1.0);
        s.r = s.r.min(formula);
        s
    } else {
        unfair_impl(delta, ratios, c)?
    };
    spec.params["dispatch"] = json!(spec.kind);
    spec.params["formula_r"] = json!(formula);
    Ok(spec)
}
