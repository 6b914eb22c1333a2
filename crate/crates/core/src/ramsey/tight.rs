use crate::error::{param, Error, Result};
use crate::hst::HstTree;
use serde::Serialize;

/// Generated hard instance with its size and the claimed subset ceiling.
#[derive(Clone, Debug, Serialize)]
pub struct TightExample {
    pub case: u8,
    pub tree: HstTree,
    pub n: usize,
    pub ell_prime: f64,
    /// `⌈log_{ℓ′} k⌉`.
    pub q: usize,
    /// Largest subset the claim allows for the case's subclass.
    pub ceiling: f64,
}

/// `ε` used when none is given: half the largest value with `(1+ε)ℓ < k`.
pub fn default_eps(k: f64, ell: f64) -> f64 {
    (k / ell - 1.0) / 2.0
}

/// Complete `ℓ′`-HST with depth-`i` label `ℓ′^{-i}`, shaped per case 1–4.
pub fn tight_example(case: u8, k: f64, ell: f64, h: usize, eps: Option<f64>, budget: usize) -> Result<TightExample> {
    if !(ell > 1.0 && k > ell) {
        return param(format!("need k > ell > 1, got k={k}, ell={ell}"));
    }
    if h == 0 {
        return param("h must be at least 1");
    }
    let eps = eps.unwrap_or_else(|| default_eps(k, ell));
    let lp = (1.0 + eps) * ell;
    if !(eps > 0.0 && lp < k) {
        return param(format!("eps must satisfy eps > 0 and (1+eps)ell < k, got {eps}"));
    }
    let q = (k.ln() / lp.ln() - 1e-12).ceil().max(1.0) as usize;
    let (arity, height) = match case {
        1 => (2, h * q),
        2 => (1usize.checked_shl(h as u32).unwrap_or(0), h * q),
        3 => {
            if h < q {
                return param(format!("case 3 needs h >= ceil(log_ell' k) = {q}, got {h}"));
            }
            (h, h * q)
        }
        4 => (2, h),
        other => return param(format!("case must be 1..=4, got {other}")),
    };
    if arity < 2 && case != 3 {
        return Err(Error::Budget(format!("arity 2^{h} overflows")));
    }
    let n = (arity as f64).powi(height as i32);
    if !(n <= budget as f64) {
        return Err(Error::Budget(format!("tight example has {n} leaves, budget {budget}")));
    }
    let n = n as usize;
    let tree = if arity == 1 {
        HstTree::leaf("0")
    } else {
        HstTree::complete(arity, height, 1.0, 1.0 / lp)
    };
    let logk = k.ln() / ell.ln();
    let nf = n as f64;
    let ceiling = match case {
        1 => nf.powf(1.0 / logk) + 1.0,
        2 => 2f64.powf(2.0 * (nf.log2() / logk).sqrt()),
        _ => (h + 1) as f64,
    };
    Ok(TightExample {
        case,
        tree,
        n,
        ell_prime: lp,
        q,
        ceiling,
    })
}
