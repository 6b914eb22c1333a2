use crate::error::{param, Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

/// Outcome of the two-way branch selector on a non-increasing size list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branching {
    /// `√n₁ + √n₂ ≥ √n`.
    Binary,
    /// `ℓ·√n_ℓ > √n` (smallest such `ℓ ≥ 3`).
    Equal(usize),
}

fn check_sorted<T: PartialOrd>(xs: &[T], positive: impl Fn(&T) -> bool) -> Result<()> {
    if xs.is_empty() {
        return param("size list must be nonempty");
    }
    if let Some(x) = xs.iter().position(|x| !positive(x)) {
        return param(format!("size list entry {x} must be positive"));
    }
    if let Some(i) = (1..xs.len()).find(|&i| xs[i] > xs[i - 1]) {
        return param(format!("size list must be non-increasing (entry {i} increases)"));
    }
    Ok(())
}

/// Exact selector over rationals.
pub fn select_branching_exact(n: &[BigRational]) -> Result<Branching> {
    check_sorted(n, |x| x.is_positive())?;
    let total: BigRational = n.iter().sum();
    let n1 = &n[0];
    let n2 = n.get(1).cloned().unwrap_or_else(BigRational::zero);
    let rest = &total - n1 - &n2;
    let four = BigRational::from_integer(BigInt::from(4));
    if !rest.is_positive() || four * n1 * &n2 >= &rest * &rest {
        return Ok(Branching::Binary);
    }
    for (i, x) in n.iter().enumerate().skip(2) {
        let l = BigRational::from_integer(BigInt::from(i + 1));
        if &l * &l * x > total {
            return Ok(Branching::Equal(i + 1));
        }
    }
    Err(Error::Invariant("no branch applies to the size list".into()))
}

/// Selector on finite positive floats, evaluated exactly.
pub fn select_branching(n: &[f64]) -> Result<Branching> {
    let exact: Vec<BigRational> = n
        .iter()
        .map(|&x| {
            BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("size {x} is not finite")))
        })
        .collect::<Result<_>>()?;
    select_branching_exact(&exact)
}

/// Selector on `n_i = e^{r_i/ρ}` given the ratios, evaluated in the log domain.
/// An all-equal list selects `Equal(b)`.
pub fn select_branching_log(r: &[f64], rho: f64) -> Result<Branching> {
    check_sorted(r, |x| x.is_finite())?;
    if !(rho > 0.0) {
        return param("rho must be positive");
    }
    if r.iter().all(|&x| x == r[0]) {
        return Ok(Branching::Equal(r.len()));
    }
    // x_i = n_i / n₁
    let x: Vec<f64> = r.iter().map(|&ri| ((ri - r[0]) / rho).exp()).collect();
    let total: f64 = x.iter().sum();
    let x2 = x.get(1).copied().unwrap_or(0.0);
    if 1.0 + x2.sqrt() >= total.sqrt() {
        return Ok(Branching::Binary);
    }
    for (i, &xi) in x.iter().enumerate().skip(2) {
        let l = (i + 1) as f64;
        if l * l * xi > total {
            return Ok(Branching::Equal(i + 1));
        }
    }
    Err(Error::Invariant("no branch applies to the ratio list".into()))
}

/// Which term of the three-way bound attains `2^{√log₂ n / 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BkrsCase {
    /// `b ≥ 2^{√log n/2}`.
    Wide,
    /// `2·n₂^{1/(2√log n)} ≥ 2^{√log n/2}`.
    Heavy2,
    /// `n₁^{1/(2√log n)} + 1 ≥ 2^{√log n/2}`.
    Heavy1,
}

/// `2^{√log₂ n / 2}` for the given total size.
pub fn bkrs_threshold(n: u64) -> f64 {
    2f64.powf((n as f64).log2().max(0.0).sqrt() / 2.0)
}

pub fn bkrs_select(n: &[u64]) -> Result<BkrsCase> {
    check_sorted(n, |&x| x > 0)?;
    let total: u64 = n.iter().sum();
    if total <= 1 {
        return Ok(BkrsCase::Wide);
    }
    let lg = (total as f64).log2();
    let s = lg.sqrt();
    let b = n.len() as f64;
    // b ≥ 2^{s/2}  ⟺  log₂ b ≥ s/2
    if b.log2() >= s / 2.0 {
        return Ok(BkrsCase::Wide);
    }
    // 2·n₂^{1/(2s)} ≥ 2^{s/2}  ⟺  log₂ n₂ ≥ lg − 2s
    if n.len() >= 2 && (n[1] as f64).log2() >= lg - 2.0 * s {
        return Ok(BkrsCase::Heavy2);
    }
    if (n[0] as f64).powf(1.0 / (2.0 * s)) + 1.0 >= 2f64.powf(s / 2.0) {
        return Ok(BkrsCase::Heavy1);
    }
    Err(Error::Invariant("no BKRS case applies to the size list".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branching_examples() {
        assert_eq!(select_branching(&[4.0, 4.0]).unwrap(), Branching::Binary);
        assert_eq!(select_branching(&[1.0; 9]).unwrap(), Branching::Equal(4));
        assert_eq!(select_branching(&[7.5]).unwrap(), Branching::Binary);
        assert!(select_branching(&[]).is_err());
        assert!(select_branching(&[1.0, 2.0]).is_err());
        assert!(select_branching(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn boundary_is_exact() {
        // 4·n₁·n₂ = R² exactly
        assert_eq!(select_branching(&[12.0, 9.0, 4.0]).unwrap(), Branching::Binary);
        assert_eq!(select_branching(&[9.0, 4.0, 4.0, 4.0, 4.0]).unwrap(), Branching::Binary);
    }

    #[test]
    fn log_domain() {
        assert_eq!(select_branching_log(&[1.0, 1.0], 0.1).unwrap(), Branching::Equal(2));
        assert_eq!(select_branching_log(&[2.0, 1.0], 1e-3).unwrap(), Branching::Binary);
        // matches the exact selector when the exponentials are representable
        let r = [0.9, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5];
        let n: Vec<f64> = r.iter().map(|x| (x / 0.2f64).exp()).collect();
        assert_eq!(select_branching_log(&r, 0.2).unwrap(), select_branching(&n).unwrap());
    }

    #[test]
    fn bkrs_examples() {
        assert_eq!(bkrs_select(&[1; 16]).unwrap(), BkrsCase::Wide);
        assert_eq!(bkrs_select(&[16]).unwrap(), BkrsCase::Heavy1);
        assert_eq!(bkrs_select(&[4, 4]).unwrap(), BkrsCase::Wide);
        assert_eq!(bkrs_select(&[1]).unwrap(), BkrsCase::Wide);
        assert!(bkrs_select(&[]).is_err());
    }
}
