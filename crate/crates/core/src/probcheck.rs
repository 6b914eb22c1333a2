//! Exact checks of the binomial tail lower bounds and balls-in-bins negative dependence.

use crate::error::{param, Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

const ENUM_BUDGET: u128 = 10_000_000;
const MAX_PRECISION: u64 = 1 << 20;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a/b"`, an integer or a finite decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("not a rational: `{s}`"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() || !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{ip}{fp}0").parse().map_err(|_| bad())?;
    let den = BigInt::from(10u32).pow(fp.len() as u32 + 1);
    let v = BigRational::new(digits, den);
    Ok(if neg { -v } else { v })
}

/// Outcome vectors with exact probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDist {
    pub outcomes: Vec<Vec<u32>>,
    pub probs: Vec<BigRational>,
}

impl ExactDist {
    pub fn total(&self) -> BigRational {
        self.probs.iter().fold(BigRational::zero(), |a, p| a + p)
    }

    /// Distribution of coordinate `i`.
    pub fn marginal(&self, i: usize) -> Vec<BigRational> {
        let top = self.outcomes.iter().map(|o| o[i]).max().unwrap_or(0) as usize;
        let mut out = vec![BigRational::zero(); top + 1];
        for (o, p) in self.outcomes.iter().zip(&self.probs) {
            out[o[i] as usize] += p;
        }
        out
    }
}

/// `Binomial(m, a/b)` as integer weights `C(m,j)·a^j·(b−a)^{m−j}` over the common denominator `b^m`.
#[derive(Clone, Debug)]
struct BinomTable {
    m: u64,
    p: BigRational,
    weights: Vec<BigInt>,
    prefix: Vec<BigInt>,
    denom: BigInt,
}

impl BinomTable {
    /// Weights for `j ≤ upto`.
    fn new(m: u64, p: &BigRational, upto: u64) -> Result<BinomTable> {
        check_p(p)?;
        let a = p.numer().clone();
        let b = p.denom().clone();
        let c = &b - &a;
        let upto = upto.min(m);
        let mut w = num_traits::pow::pow(c.clone(), m as usize);
        let mut weights = Vec::with_capacity(upto as usize + 1);
        let mut prefix = Vec::with_capacity(upto as usize + 1);
        let mut acc = BigInt::zero();
        for j in 0..=upto {
            acc += &w;
            weights.push(w.clone());
            prefix.push(acc.clone());
            if j < upto {
                w = w * BigInt::from(m - j) * &a / (BigInt::from(j + 1) * &c);
            }
        }
        Ok(BinomTable {
            m,
            p: p.clone(),
            weights,
            prefix,
            denom: num_traits::pow::pow(b, m as usize),
        })
    }

    fn tail(&self, x: u64) -> BigRational {
        if x >= self.m {
            return BigRational::one();
        }
        BigRational::new(self.prefix[x as usize].clone(), self.denom.clone())
    }

    fn point(&self, k: u64) -> BigRational {
        BigRational::new(self.weights[k as usize].clone(), self.denom.clone())
    }
}

fn check_p(p: &BigRational) -> Result<()> {
    if !(p.is_positive() && *p < BigRational::one()) {
        return param(format!("p must lie in (0,1), got {p}"));
    }
    Ok(())
}

/// `Pr[X ≤ x]` for `X ~ Binomial(m, p)`, exactly.
pub fn binom_tail(m: u64, p: &BigRational, x: u64) -> Result<BigRational> {
    if x > m {
        return param(format!("x = {x} exceeds m = {m}"));
    }
    Ok(BinomTable::new(m, p, x)?.tail(x))
}

/// `Pr[X = k]` for `X ~ Binomial(m, p)`, exactly.
pub fn binom_point(m: u64, p: &BigRational, k: u64) -> Result<BigRational> {
    if k > m {
        return param(format!("k = {k} exceeds m = {m}"));
    }
    Ok(BinomTable::new(m, p, k)?.point(k))
}

/// Certified enclosure `lo ≤ e^y ≤ hi` for rational `y ≥ 0`, as fixed-point values over `2^prec`.
pub fn exp_enclosure(y: &BigRational, prec: u64) -> (BigRational, BigRational) {
    assert!(!y.is_negative(), "exp_enclosure needs y >= 0");
    let one = BigInt::one() << prec;
    let scale = BigRational::from_integer(one.clone());
    if y.is_zero() {
        return (BigRational::one(), BigRational::one());
    }
    // z = y / 2^s ≤ 1/2
    let ceil = y.ceil().to_integer();
    let s = ceil.bits() + 1;
    let z = y / BigRational::from_integer(BigInt::one() << s);
    let zs = z * &scale;
    let z_lo = zs.floor().to_integer();
    let z_hi = zs.ceil().to_integer();
    let (mut lo, mut t) = (one.clone(), one.clone());
    let mut k = 1u64;
    while !t.is_zero() {
        t = (&t * &z_lo) / (&one * BigInt::from(k));
        lo += &t;
        k += 1;
    }
    let (mut hi, mut t) = (one.clone(), one.clone());
    let mut k = 1u64;
    loop {
        t = ceil_div(&(&t * &z_hi), &(&one * BigInt::from(k)));
        if t <= BigInt::one() {
            hi += &t * 3 + 1;
            break;
        }
        hi += &t;
        k += 1;
    }
    for _ in 0..s {
        lo = (&lo * &lo) >> prec;
        hi = ceil_div(&(&hi * &hi), &one);
    }
    (
        BigRational::new(lo, one.clone()),
        BigRational::new(hi, one),
    )
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

/// Decides `coef · e^y ≥ rhs` for `coef ≥ 0`, `y ≥ 0`, raising precision until settled.
pub fn certify_exp_ge(coef: &BigRational, y: &BigRational, rhs: &BigRational) -> Result<bool> {
    if y.is_zero() {
        return Ok(coef >= rhs);
    }
    let mut prec = 64;
    while prec <= MAX_PRECISION {
        let (lo, hi) = exp_enclosure(y, prec);
        if coef * lo >= *rhs {
            return Ok(true);
        }
        if coef * hi < *rhs {
            return Ok(false);
        }
        prec *= 2;
    }
    Err(Error::Budget(format!("could not decide comparison at {MAX_PRECISION} bits")))
}

/// Natural log of a positive rational, approximately.
pub fn ln_rational(x: &BigRational) -> f64 {
    fn ln_int(v: &BigInt) -> f64 {
        let bits = v.bits();
        if bits <= 1000 {
            return v.to_f64().unwrap_or(f64::INFINITY).ln();
        }
        let shift = bits - 64;
        (v >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
    }
    ln_int(x.numer()) - ln_int(x.denom())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub pass: bool,
    /// `ln LHS − ln RHS` (approximate).
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCheck {
    pub m: u64,
    pub p: String,
    pub mu: String,
    pub delta: String,
    pub x: u64,
    pub tail: f64,
    /// `Pr[X ≤ ⌊(1−δ)μ⌋] ≥ e^{−13δ²μ}/180`.
    pub lemma: BoundCheck,
    /// Point mass at `k = ⌊(1−δ)μ⌋` against `f(η)^{η²μ}/(3√μ)`, `η = 1 − k/μ`; only when `0 < η < 1`.
    pub point_mass: Option<BoundCheck>,
    /// `Pr[X ≤ (1−δ)μ] ≥ (δ√μ/6)e^{−7δ²μ}`; only when `δ ≤ 1/3` and `δμ ≥ 4`.
    pub small_delta: Option<BoundCheck>,
}

impl TailCheck {
    pub fn pass(&self) -> bool {
        self.lemma.pass
            && self.point_mass.as_ref().map_or(true, |c| c.pass)
            && self.small_delta.as_ref().map_or(true, |c| c.pass)
    }
}

fn check_tail_pre(m: u64, p: &BigRational, delta: &BigRational) -> Result<BigRational> {
    check_p(p)?;
    if *p > ratio(1, 2) {
        return param(format!("p must be at most 1/2, got {p}"));
    }
    if delta.is_negative() || *delta > BigRational::one() {
        return param(format!("delta must lie in [0,1], got {delta}"));
    }
    let mu = p * BigRational::from_integer(BigInt::from(m));
    if mu < BigRational::from_integer(BigInt::from(4)) {
        return param(format!("mu = pm must be at least 4, got {mu}"));
    }
    Ok(mu)
}

/// Checks the tail lower bound and, where they apply, the point-mass and small-`δ` bounds.
pub fn check_tail_lb(m: u64, p: &BigRational, delta: &BigRational) -> Result<TailCheck> {
    let mu = check_tail_pre(m, p, delta)?;
    let x = ((BigRational::one() - delta) * &mu).floor().to_integer().to_u64().expect("x ≤ m");
    let table = BinomTable::new(m, p, x)?;
    tail_check_with(&table, &mu, delta)
}

fn tail_check_with(t: &BinomTable, mu: &BigRational, delta: &BigRational) -> Result<TailCheck> {
    let one = BigRational::one();
    let x = ((&one - delta) * mu).floor().to_integer().to_u64().expect("x ≤ m");
    let tail = t.tail(x);
    let d2mu = delta * delta * mu;
    let ln_tail = ln_rational(&tail);

    let y = &d2mu * ratio(13, 1);
    let lemma = BoundCheck {
        pass: certify_exp_ge(&(&tail * ratio(180, 1)), &y, &one)?,
        margin: ln_tail + 180f64.ln() + y.to_f64().unwrap_or(f64::INFINITY),
    };

    let point_mass = if x >= 1 && BigRational::from_integer(BigInt::from(x)) < *mu {
        Some(point_mass_check(t, mu, x))
    } else {
        None
    };

    let small_delta = if delta.is_positive() && *delta <= ratio(1, 3) && delta * mu >= ratio(4, 1) {
        // (6·tail)² e^{14δ²μ} ≥ δ²μ
        let six = &tail * ratio(6, 1);
        let y = &d2mu * ratio(14, 1);
        let pass = certify_exp_ge(&(&six * &six), &y, &d2mu)?;
        let margin = ln_tail + 6f64.ln() + 7.0 * d2mu.to_f64().unwrap_or(f64::INFINITY) - 0.5 * ln_rational(&d2mu);
        Some(BoundCheck { pass, margin })
    } else {
        None
    };

    Ok(TailCheck {
        m: t.m,
        p: t.p.to_string(),
        mu: mu.to_string(),
        delta: delta.to_string(),
        x,
        tail: tail.to_f64().unwrap_or(0.0),
        lemma,
        point_mass,
        small_delta,
    })
}

/// `Pr[X=k] ≥ (k/μ)^{μ−k}/(3√μ)`, which is `f(η)^{η²μ}/(3√μ)` at `η = 1 − k/μ`.
/// With `μ = M/d` both sides are raised to the power `2d`, so the comparison is exact.
fn point_mass_check(t: &BinomTable, mu: &BigRational, k: u64) -> BoundCheck {
    let (big_m, d) = (mu.numer(), mu.denom());
    let du = d.to_usize().expect("small denominator");
    let w = &t.weights[k as usize];
    let kd = BigInt::from(k) * d;
    let e = ((big_m - &kd) * 2u32).to_usize().expect("small exponent");
    // (9·M·W²)^d · M^e ≥ (k·d)^e · (d·B²)^d, all in integers
    let lhs = num_traits::pow::pow(big_m * w * w * 9u32, du) * num_traits::pow::pow(big_m.clone(), e);
    let rhs = num_traits::pow::pow(kd, e) * num_traits::pow::pow(d * &t.denom * &t.denom, du);
    let pk = t.point(k);
    let mu_f = mu.to_f64().unwrap_or(f64::INFINITY);
    let base = BigRational::from_integer(BigInt::from(k)) / mu;
    let margin = ln_rational(&pk) + 3f64.ln() + 0.5 * mu_f.ln() - (mu_f - k as f64) * ln_rational(&base);
    BoundCheck { pass: lhs >= rhs, margin }
}

/// Grid of `(p, m)` pairs: `p = i/20` for `i ∈ 1..=10`, `μ` from `mu_lo` to `mu_hi`, `m` nearest `μ/p`
/// (bumped until `pm ≥ 4`).
pub fn default_grid(mu_lo: u64, mu_hi: u64) -> Vec<(BigRational, u64)> {
    let mut out = Vec::new();
    for i in 1..=10i64 {
        let p = ratio(i, 20);
        let mut last = None;
        for mu in mu_lo..=mu_hi {
            let target = BigRational::from_integer(BigInt::from(mu)) / &p;
            let mut m = target.round().to_integer().to_u64().expect("positive");
            while &p * BigRational::from_integer(BigInt::from(m)) < ratio(4, 1) {
                m += 1;
            }
            if last != Some(m) {
                out.push((p.clone(), m));
                last = Some(m);
            }
        }
    }
    out
}

pub fn default_deltas() -> Vec<BigRational> {
    (0..=10).map(|i| ratio(i, 10)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TailGridReport {
    pub points: usize,
    pub failures: usize,
    pub point_mass_checked: usize,
    pub small_delta_checked: usize,
    pub min_margin: f64,
    pub checks: Vec<TailCheck>,
}

impl TailGridReport {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

/// Runs [`check_tail_lb`] over every `(p, m)` and `δ`, one binomial table per `(p, m)`.
pub fn tail_grid(grid: &[(BigRational, u64)], deltas: &[BigRational]) -> Result<TailGridReport> {
    let rows: Vec<Vec<TailCheck>> = grid
        .par_iter()
        .map(|(p, m)| -> Result<Vec<TailCheck>> {
            let mu = check_tail_pre(*m, p, &BigRational::zero())?;
            let top = mu.floor().to_integer().to_u64().expect("x ≤ m");
            let table = BinomTable::new(*m, p, top)?;
            deltas
                .iter()
                .map(|d| {
                    check_tail_pre(*m, p, d)?;
                    tail_check_with(&table, &mu, d)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let checks: Vec<TailCheck> = rows.into_iter().flatten().collect();
    let margins = checks.iter().flat_map(|c| {
        std::iter::once(c.lemma.margin)
            .chain(c.point_mass.iter().map(|b| b.margin))
            .chain(c.small_delta.iter().map(|b| b.margin))
    });
    Ok(TailGridReport {
        points: checks.len(),
        failures: checks.iter().filter(|c| !c.pass()).count(),
        point_mass_checked: checks.iter().filter(|c| c.point_mass.is_some()).count(),
        small_delta_checked: checks.iter().filter(|c| c.small_delta.is_some()).count(),
        min_margin: margins.fold(f64::INFINITY, f64::min),
        checks,
    })
}

fn enum_budget(m: u32, n: u32) -> Result<()> {
    if n == 0 {
        return param("need at least one bin");
    }
    let total = (n as u128).checked_pow(m).unwrap_or(u128::MAX);
    if total > ENUM_BUDGET {
        return Err(Error::Budget(format!("n^m = {n}^{m} exceeds {ENUM_BUDGET}")));
    }
    Ok(())
}

fn compositions(m: u32, n: usize) -> Vec<Vec<u32>> {
    fn rec(left: u32, slot: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[slot] = v;
            rec(left - v, slot + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(m, 0, &mut vec![0; n], &mut out);
    out
}

fn factorials(m: u32) -> Vec<BigInt> {
    let mut f = vec![BigInt::one()];
    for i in 1..=m {
        let next = &f[i as usize - 1] * BigInt::from(i);
        f.push(next);
    }
    f
}

/// Integer weights (multinomial coefficients) over the common denominator `n^m`.
fn balls_bins_weights(m: u32, n: u32) -> Result<(Vec<Vec<u32>>, Vec<BigInt>, BigInt)> {
    enum_budget(m, n)?;
    let f = factorials(m);
    let outs = compositions(m, n as usize);
    let w = outs
        .iter()
        .map(|o| o.iter().fold(f[m as usize].clone(), |acc, &x| acc / &f[x as usize]))
        .collect();
    Ok((outs, w, BigInt::from(n).pow(m)))
}

/// Exact joint law of the bin loads when `m` balls go independently and uniformly into `n` bins.
pub fn balls_bins_joint(m: u32, n: u32) -> Result<ExactDist> {
    let (outcomes, w, total) = balls_bins_weights(m, n)?;
    let probs = w.into_iter().map(|x| BigRational::new(x, total.clone())).collect();
    Ok(ExactDist { outcomes, probs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NegDepReport {
    pub m: u32,
    pub n: u32,
    /// Threshold vectors tested for the product inequality.
    pub product_checked: usize,
    pub product_violations: usize,
    /// Threshold vectors tested for the conditional expectation inequality (`Pr[Z] > 0`).
    pub expectation_checked: usize,
    pub expectation_skipped: usize,
    pub expectation_violations: usize,
    pub first_violation: Option<String>,
}

impl NegDepReport {
    pub fn pass(&self) -> bool {
        self.product_violations == 0 && self.expectation_violations == 0
    }
}

fn for_each_threshold(m: u32, len: usize, mut f: impl FnMut(&[u32])) {
    let mut a = vec![0u32; len];
    loop {
        f(&a);
        let mut i = 0;
        while i < len && a[i] == m {
            a[i] = 0;
            i += 1;
        }
        if i == len {
            return;
        }
        a[i] += 1;
    }
}

/// For every `ℓ ≤ n` and `α ∈ {0,…,m}^ℓ`: `Pr[⋀_{i≤ℓ} X_i > α_i] ≤ ∏ Pr[X_i > α_i]`; and for every
/// `α ∈ {0,…,m}^{n−1}` with `Z = ⋀_{i≥2} X_i > α_i`, `E[X₁ | Z] ≤ E[X₁] = m/n` when `Pr[Z] > 0`.
pub fn check_negdep(m: u32, n: u32) -> Result<NegDepReport> {
    let (outs, w, total) = balls_bins_weights(m, n)?;
    let vectors: u128 = (1..=n).map(|l| (m as u128 + 1).pow(l)).sum();
    if vectors.saturating_mul(outs.len() as u128) > 50 * ENUM_BUDGET {
        return Err(Error::Budget(format!("{vectors} threshold vectors over {} outcomes", outs.len())));
    }
    // Pr[X_i > a] · n^m, identical for every bin.
    let marg = balls_bins_joint(m, n)?.marginal(0);
    let mut upper = vec![BigInt::zero(); m as usize + 1];
    for a in 0..=m as usize {
        let s: BigRational = marg.iter().skip(a + 1).fold(BigRational::zero(), |x, y| x + y);
        upper[a] = (s * BigRational::from_integer(total.clone())).to_integer();
    }
    let mut rep = NegDepReport {
        m,
        n,
        product_checked: 0,
        product_violations: 0,
        expectation_checked: 0,
        expectation_skipped: 0,
        expectation_violations: 0,
        first_violation: None,
    };
    for l in 1..=n as usize {
        for_each_threshold(m, l, |a| {
            let joint: BigInt = outs
                .iter()
                .zip(&w)
                .filter(|(o, _)| (0..l).all(|i| o[i] > a[i]))
                .map(|(_, x)| x)
                .sum();
            let prod = a.iter().fold(BigInt::one(), |acc, &ai| acc * &upper[ai as usize]);
            rep.product_checked += 1;
            if joint * total.pow(l as u32 - 1) > prod {
                rep.product_violations += 1;
                rep.first_violation.get_or_insert_with(|| format!("product inequality at alpha={a:?}"));
            }
        });
    }
    let rest = n as usize - 1;
    let mut check_z = |a: &[u32]| {
        let mut wz = BigInt::zero();
        let mut x1 = BigInt::zero();
        for (o, x) in outs.iter().zip(&w) {
            if (0..rest).all(|i| o[i + 1] > a[i]) {
                wz += x;
                x1 += x * BigInt::from(o[0]);
            }
        }
        if wz.is_zero() {
            rep.expectation_skipped += 1;
            return;
        }
        rep.expectation_checked += 1;
        if x1 * BigInt::from(n) > wz * BigInt::from(m) {
            rep.expectation_violations += 1;
            rep.first_violation.get_or_insert_with(|| format!("conditional expectation at alpha={a:?}"));
        }
    };
    if rest == 0 {
        check_z(&[]);
    } else {
        for_each_threshold(m, rest, check_z);
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct NegDepSweep {
    pub max_m: u32,
    pub max_n: u32,
    pub reports: Vec<NegDepReport>,
}

impl NegDepSweep {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(NegDepReport::pass)
    }
}

/// [`check_negdep`] for every `1 ≤ m ≤ max_m`, `1 ≤ n ≤ max_n`.
pub fn negdep_sweep(max_m: u32, max_n: u32) -> Result<NegDepSweep> {
    let pairs: Vec<(u32, u32)> = (1..=max_m).flat_map(|m| (1..=max_n).map(move |n| (m, n))).collect();
    let reports = pairs
        .par_iter()
        .map(|&(m, n)| check_negdep(m, n))
        .collect::<Result<_>>()?;
    Ok(NegDepSweep { max_m, max_n, reports })
}
