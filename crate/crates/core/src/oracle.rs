//! Brute-force approximability oracles for small spaces.

use crate::error::{param, Error, Result};
use crate::hst::HstTree;
use crate::metric::MetricSpace;
use std::collections::HashMap;

pub const MAX_ORACLE_POINTS: usize = 20;

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

fn cross(m: &MetricSpace, blocks: &[u32]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (a, &x) in blocks.iter().enumerate() {
        for &y in &blocks[a + 1..] {
            for i in bits(x) {
                for j in bits(y) {
                    lo = lo.min(m.d(i, j));
                    hi = hi.max(m.d(i, j));
                }
            }
        }
    }
    (lo, hi)
}

/// Smallest root label of a `k`-HST `W` on `mask` with `d_W ≤ d ≤ ℓ·d_W`, for `ℓ < k`.
struct KhstDp<'a> {
    m: &'a MetricSpace,
    k: f64,
    ell: f64,
    memo: HashMap<u32, f64>,
}

impl KhstDp<'_> {
    fn f(&mut self, mask: u32) -> f64 {
        if mask.count_ones() <= 1 {
            return 0.0;
        }
        if let Some(&v) = self.memo.get(&mask) {
            return v;
        }
        let pts: Vec<usize> = bits(mask).collect();
        let mut dists: Vec<f64> = Vec::new();
        for (a, &i) in pts.iter().enumerate() {
            for &j in &pts[a + 1..] {
                dists.push(self.m.d(i, j));
            }
        }
        dists.sort_by(f64::total_cmp);
        dists.dedup();
        let mut best = f64::INFINITY;
        // Root blocks are the components of `d ≤ t` for some threshold below the root label.
        let mut thresholds = vec![0.0];
        thresholds.extend_from_slice(&dists[..dists.len() - 1]);
        for t in thresholds {
            let blocks = components(self.m, &pts, t);
            if blocks.len() < 2 {
                continue;
            }
            let (lo, hi) = cross(self.m, &blocks);
            let mut need = hi / self.ell;
            for &b in &blocks {
                need = need.max(self.k * self.f(b));
            }
            if need <= lo && need < best {
                best = need;
            }
        }
        self.memo.insert(mask, best);
        best
    }
}

fn components(m: &MetricSpace, pts: &[usize], t: f64) -> Vec<u32> {
    let mut comp: Vec<usize> = (0..pts.len()).collect();
    fn find(c: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while c[r] != r {
            r = c[r];
        }
        c[x] = r;
        r
    }
    for a in 0..pts.len() {
        for b in (a + 1)..pts.len() {
            if m.d(pts[a], pts[b]) <= t {
                let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
                comp[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut by_root: Vec<(usize, u32)> = Vec::new();
    for a in 0..pts.len() {
        let r = find(&mut comp, a);
        match by_root.iter_mut().find(|(x, _)| *x == r) {
            Some((_, mask)) => *mask |= 1 << pts[a],
            None => by_root.push((r, 1 << pts[a])),
        }
    }
    by_root.into_iter().map(|(_, m)| m).collect()
}

fn check_size(m: &MetricSpace) -> Result<()> {
    if m.len() > MAX_ORACLE_POINTS {
        return Err(Error::Budget(format!(
            "oracle limited to {MAX_ORACLE_POINTS} points, got {}",
            m.len()
        )));
    }
    Ok(())
}

/// Whether the whole space `ℓ`-approximates some `k`-HST (`1 ≤ ℓ < k`).
pub fn khst_approximable(m: &MetricSpace, k: f64, ell: f64) -> Result<bool> {
    check_size(m)?;
    if !(ell >= 1.0 && k > ell) {
        return param(format!("oracle needs 1 <= ell < k, got ell={ell}, k={k}"));
    }
    let mut dp = KhstDp { m, k, ell, memo: HashMap::new() };
    Ok(dp.f(((1u64 << m.len()) - 1) as u32).is_finite())
}

/// Largest subset that `ℓ`-approximates some `k`-HST (exhaustive, `ℓ < k`).
pub fn max_khst_subset(m: &MetricSpace, k: f64, ell: f64) -> Result<Vec<String>> {
    check_size(m)?;
    if !(ell >= 1.0 && k > ell) {
        return param(format!("oracle needs 1 <= ell < k, got ell={ell}, k={k}"));
    }
    let mut dp = KhstDp { m, k, ell, memo: HashMap::new() };
    Ok(max_subset(m, |mask| dp.f(mask).is_finite()))
}

/// Largest subset whose metric is `α`-approximated by an ultrametric (via the subdominant ultrametric).
pub fn max_ultrametric_subset(m: &MetricSpace, alpha: f64) -> Result<Vec<String>> {
    check_size(m)?;
    if !(alpha >= 1.0) {
        return param(format!("alpha must be >= 1, got {alpha}"));
    }
    Ok(max_subset(m, |mask| {
        let idx: Vec<usize> = bits(mask).collect();
        ultrametric_factor(&m.restrict_indices(&idx)) <= alpha * (1.0 + 1e-12)
    }))
}

/// Dominated factor of the subdominant ultrametric, the best over all ultrametrics.
pub fn ultrametric_factor(m: &MetricSpace) -> f64 {
    if m.len() <= 1 {
        return 1.0;
    }
    let u = HstTree::subdominant_ultrametric(m);
    let um = u.to_metric().expect("valid tree");
    let sub = m.restrict(um.points()).expect("same points");
    sub.approximation_factor(&um).expect("same points").alpha
}

/// Approximability is hereditary, so sizes are scanned from the top down.
fn max_subset(m: &MetricSpace, mut ok: impl FnMut(u32) -> bool) -> Vec<String> {
    let n = m.len();
    for size in (1..=n).rev() {
        let mut found = None;
        for_each_subset(n, size, &mut |mask| {
            if found.is_none() && ok(mask) {
                found = Some(mask);
            }
            found.is_none()
        });
        if let Some(mask) = found {
            return bits(mask).map(|i| m.points()[i].clone()).collect();
        }
    }
    Vec::new()
}

/// Visits `size`-subsets of `0..n` in increasing mask order until `f` returns false.
fn for_each_subset(n: usize, size: usize, f: &mut impl FnMut(u32) -> bool) {
    if size == 0 || size > n {
        return;
    }
    let mut mask: u32 = (1u32 << size) - 1;
    let limit: u64 = 1u64 << n;
    while (mask as u64) < limit {
        if !f(mask) {
            return;
        }
        // next subset of the same popcount
        let c = mask & mask.wrapping_neg();
        let r = mask as u64 + c as u64;
        if r >= limit {
            return;
        }
        let r = r as u32;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
}

/// Exhaustive feasibility over all set partitions: is there a `k`-HST `W` with
/// `d_W ≤ d ≤ α·d_W`? Any `k ≥ 1`, `α ≥ 1`; at most 9 points.
pub fn hst_approximable_bruteforce(m: &MetricSpace, alpha: f64, k: f64) -> Result<bool> {
    if m.len() > 9 {
        return Err(Error::Budget("partition brute force limited to 9 points".into()));
    }
    fn f(m: &MetricSpace, mask: u32, alpha: f64, k: f64, memo: &mut HashMap<u32, f64>) -> f64 {
        if mask.count_ones() <= 1 {
            return 0.0;
        }
        if let Some(&v) = memo.get(&mask) {
            return v;
        }
        let mut best = f64::INFINITY;
        let mut blocks = Vec::new();
        partitions(mask, &mut blocks, &mut |p| {
            if p.len() < 2 {
                return;
            }
            let (lo, hi) = cross(m, p);
            let mut need = hi / alpha;
            for &b in p {
                need = need.max(k * f(m, b, alpha, k, memo));
            }
            if need <= lo {
                best = best.min(need);
            }
        });
        memo.insert(mask, best);
        best
    }
    let mut memo = HashMap::new();
    Ok(f(m, ((1u64 << m.len()) - 1) as u32, alpha, k, &mut memo).is_finite())
}

fn partitions(rest: u32, acc: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
    if rest == 0 {
        visit(acc);
        return;
    }
    let low = rest & rest.wrapping_neg();
    let others = rest ^ low;
    // every block containing the lowest remaining element
    let mut sub = others;
    loop {
        acc.push(low | sub);
        partitions(others ^ sub, acc, visit);
        acc.pop();
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & others;
    }
}
