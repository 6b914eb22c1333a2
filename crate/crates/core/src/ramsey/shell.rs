use super::Extraction;
use crate::error::{param, Result};
use crate::hst::HstTree;
use crate::metric::MetricSpace;

/// Number of shells `t = ⌈log_β log₂ n + 1⌉` with `β` clamped to `log₂ n`.
pub fn shell_t(n: usize, beta: f64) -> (usize, f64) {
    let lg = (n as f64).log2();
    let b = beta.min(lg);
    (((lg.ln() / b.ln()) + 1.0 - 1e-12).ceil().max(1.0) as usize, b)
}

/// Recursive shell deletion around a diameter endpoint; yields a dominated 1-HST.
pub fn shell_extract(m: &MetricSpace, beta: f64) -> Result<Extraction> {
    if !(beta > 1.0) {
        return param(format!("beta must exceed 1, got {beta}"));
    }
    let n = m.len();
    if n <= 2 {
        let tree = if n == 1 {
            HstTree::leaf(m.points()[0].clone())
        } else {
            HstTree::node(
                m.d(0, 1),
                vec![HstTree::leaf(m.points()[0].clone()), HstTree::leaf(m.points()[1].clone())],
            )
        };
        return Extraction::measured(m, tree, n as f64, 1.0);
    }
    let (t, b) = shell_t(n, beta);
    let all: Vec<usize> = (0..n).collect();
    let tree = split(m, &all, t, b);
    let mut ex = Extraction::measured(m, tree, (n as f64).powf(1.0 / beta), (2 * t + 1) as f64)?;
    ex.t = Some(t);
    Ok(ex)
}

fn split(m: &MetricSpace, v: &[usize], t: usize, beta: f64) -> HstTree {
    if v.len() == 1 {
        return HstTree::leaf(m.points()[v[0]].clone());
    }
    let mut diam = 0.0;
    let mut x = v[0];
    for (a, &i) in v.iter().enumerate() {
        for &j in &v[a + 1..] {
            if m.d(i, j) > diam {
                diam = m.d(i, j);
                x = i;
            }
        }
    }
    let w = (2 * t + 1) as f64;
    // shell index of y: smallest i with d(x,y) ≤ Δ·i/(2t+1)
    let shell_of = |y: usize| -> usize {
        let d = m.d(x, y);
        let mut i = ((d / diam) * w).ceil() as usize;
        while i > 0 && d <= diam * (i - 1) as f64 / w {
            i -= 1;
        }
        while d > diam * i as f64 / w {
            i += 1;
        }
        i
    };
    let shells: Vec<usize> = v.iter().map(|&y| shell_of(y)).collect();
    let nv = v.len() as f64;
    let eps: Vec<f64> = (0..=2 * t)
        .map(|i| shells.iter().filter(|&&s| s <= i).count() as f64 / nv)
        .collect();
    let score = |i: usize| eps[i - 1].powf(1.0 / beta) + (1.0 - eps[i]).powf(1.0 / beta);
    let order: Vec<usize> = if eps[t] > 0.5 {
        (1..=2 * t).rev().collect()
    } else {
        (1..=2 * t).collect()
    };
    let mut best = order[0];
    for &i in &order {
        if score(i) > score(best) {
            best = i;
        }
    }
    let inner: Vec<usize> = v.iter().zip(&shells).filter(|(_, &s)| s < best).map(|(&y, _)| y).collect();
    let outer: Vec<usize> = v.iter().zip(&shells).filter(|(_, &s)| s > best).map(|(&y, _)| y).collect();
    HstTree::node(diam / w, vec![split(m, &inner, t, beta), split(m, &outer, t, beta)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{path, uniform};

    #[test]
    fn tiny_spaces_exact() {
        for n in 1..=2 {
            let ex = shell_extract(&path(n, 1.0).unwrap(), 2.0).unwrap();
            assert_eq!(ex.subset.len(), n);
            assert_eq!(ex.measured_factor, 1.0);
        }
    }

    #[test]
    fn uniform_keeps_everything() {
        let ex = shell_extract(&uniform(4, 1.0).unwrap(), 2.0).unwrap();
        assert_eq!(ex.t, Some(2));
        assert_eq!(ex.subset.len(), 4);
        assert!(ex.dominated && ex.measured_factor <= 5.0);
    }

    #[test]
    fn path_size_bound() {
        let ex = shell_extract(&path(16, 1.0).unwrap(), 2.0).unwrap();
        assert!(ex.subset.len() >= 4);
        assert!(ex.meets_guarantees(1e-9));
        assert!(ex.tree.validate().is_ok());
    }

    #[test]
    fn t_formula() {
        assert_eq!(shell_t(16, 2.0).0, 3);
        assert_eq!(shell_t(256, 2.0).0, 4);
        assert_eq!(shell_t(4, 2.0).0, 2);
        assert_eq!(shell_t(3, 2.0).0, 2);
        assert_eq!(shell_t(1 << 16, 100.0).1, 16.0);
    }
}
