//! Finite metric spaces.

use crate::error::{param, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub const DEFAULT_TOL: f64 = 1e-9;

/// A validated finite metric space with a dense row-major distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace {
    points: Vec<String>,
    dist: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MetricJson {
    points: Vec<String>,
    dist: Vec<Vec<f64>>,
}

/// Result of comparing a metric against an approximating one on the same points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    /// Dominated factor when `dominated`, otherwise the scale-optimal factor.
    pub alpha: f64,
    pub dominated: bool,
    /// Pair attaining the largest ratio `d_M / d_M'`.
    pub worst_pair: (String, String),
    /// Largest scalar `γ` with `γ·M' ≤ M`.
    pub optimal_rescale: f64,
    /// Factor of `optimal_rescale · M'` against `M`.
    pub rescaled_alpha: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

impl MetricSpace {
    /// Checks the metric axioms and builds the space.
    pub fn validate(matrix: &[Vec<f64>], names: Vec<String>, tol: f64) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::InvalidMetric("empty matrix".into()));
        }
        if names.len() != n {
            return Err(Error::InvalidMetric(format!(
                "{} names for a {n}x{n} matrix",
                names.len()
            )));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMetric(format!(
                    "row {i} has length {} (expected {n})",
                    row.len()
                )));
            }
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if let Some(j) = seen.insert(name.as_str(), i) {
                return Err(Error::InvalidMetric(format!(
                    "duplicate point id `{name}` at {j} and {i}"
                )));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let d = matrix[i][j];
                if !d.is_finite() {
                    return Err(Error::InvalidMetric(format!("non-finite entry at ({i},{j})")));
                }
                if d < 0.0 {
                    return Err(Error::InvalidMetric(format!("negative entry at ({i},{j}): {d}")));
                }
                if i == j && d != 0.0 {
                    return Err(Error::InvalidMetric(format!("nonzero diagonal at ({i},{i}): {d}")));
                }
                if i != j && d == 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "zero off-diagonal at ({i},{j}): distinct points must be apart"
                    )));
                }
                if j > i && !close(d, matrix[j][i], tol) {
                    return Err(Error::InvalidMetric(format!(
                        "asymmetry at ({i},{j}): {d} vs {}",
                        matrix[j][i]
                    )));
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                let dik = matrix[i][k];
                for j in 0..n {
                    let via = matrix[i][j] + matrix[j][k];
                    if dik > via * (1.0 + tol) {
                        let (a, c) = if i < k { (i, k) } else { (k, i) };
                        return Err(Error::InvalidMetric(format!(
                            "triangle violation ({a},{c}) via {j}: {dik} > {} + {}",
                            matrix[i][j], matrix[j][k]
                        )));
                    }
                }
            }
        }
        Ok(MetricSpace {
            points: names,
            dist: matrix.iter().flatten().copied().collect(),
        })
    }

    /// Builds a space whose axioms hold by construction. Ids must be distinct.
    pub(crate) fn from_fn(points: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = f(i, j);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        MetricSpace { points, dist }
    }

    /// Collapses points at zero distance into their first occurrence, then validates.
    pub fn dedupe(matrix: &[Vec<f64>], names: Vec<String>, tol: f64) -> Result<Self> {
        let n = matrix.len();
        let mut keep: Vec<usize> = Vec::new();
        for i in 0..n {
            if !keep.iter().any(|&j| matrix[i][j] == 0.0) {
                keep.push(i);
            }
        }
        let sub: Vec<Vec<f64>> = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| matrix[i][j]).collect())
            .collect();
        let sub_names = keep.iter().map(|&i| names[i].clone()).collect();
        Self::validate(&sub, sub_names, tol)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.points.len() + j]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == id)
            .ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.len()).map(|r| r.to_vec()).collect()
    }

    /// Subspace on the given ids, in the given order.
    pub fn restrict<S: AsRef<str>>(&self, ids: &[S]) -> Result<MetricSpace> {
        if ids.is_empty() {
            return param("restrict needs a nonempty subset");
        }
        let lookup: HashMap<&str, usize> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        let mut idx = Vec::with_capacity(ids.len());
        for id in ids {
            let id = id.as_ref();
            let i = *lookup
                .get(id)
                .ok_or_else(|| Error::UnknownPoint(id.to_string()))?;
            if idx.contains(&i) {
                return param(format!("duplicate id `{id}` in subset"));
            }
            idx.push(i);
        }
        Ok(self.restrict_indices(&idx))
    }

    pub fn restrict_indices(&self, idx: &[usize]) -> MetricSpace {
        let points = idx.iter().map(|&i| self.points[i].clone()).collect();
        MetricSpace::from_fn(points, |a, b| self.d(idx[a], idx[b]))
    }

    pub fn scale(&self, gamma: f64) -> Result<MetricSpace> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return param(format!("scale factor must be positive, got {gamma}"));
        }
        Ok(MetricSpace {
            points: self.points.clone(),
            dist: self.dist.iter().map(|d| d * gamma).collect(),
        })
    }

    /// Largest distance and the lexicographically first pair attaining it.
    pub fn diameter(&self) -> (f64, (usize, usize)) {
        let n = self.len();
        let mut best = (0.0, (0, 0));
        for i in 0..n {
            for j in (i + 1)..n {
                if self.d(i, j) > best.0 {
                    best = (self.d(i, j), (i, j));
                }
            }
        }
        best
    }

    /// Compares `self` (M) against `other` (M') on the same point set.
    pub fn approximation_factor(&self, other: &MetricSpace) -> Result<ApproxReport> {
        let n = self.len();
        if other.len() != n {
            return Err(Error::Mismatch(format!(
                "point sets differ in size: {n} vs {}",
                other.len()
            )));
        }
        let map: Vec<usize> = if self.points == other.points {
            (0..n).collect()
        } else {
            let lookup: HashMap<&str, usize> = other
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| (p.as_str(), i))
                .collect();
            self.points
                .iter()
                .map(|p| {
                    lookup
                        .get(p.as_str())
                        .copied()
                        .ok_or_else(|| Error::Mismatch(format!("point `{p}` missing")))
                })
                .collect::<Result<_>>()?
        };
        let mut max_ratio = f64::NEG_INFINITY;
        let mut min_ratio = f64::INFINITY;
        let mut worst = (0, 0);
        for i in 0..n {
            for j in (i + 1)..n {
                let r = self.d(i, j) / other.d(map[i], map[j]);
                if r > max_ratio {
                    max_ratio = r;
                    worst = (i, j);
                }
                min_ratio = min_ratio.min(r);
            }
        }
        if n == 1 {
            max_ratio = 1.0;
            min_ratio = 1.0;
        }
        let dominated = min_ratio >= 1.0;
        let rescaled_alpha = max_ratio / min_ratio;
        Ok(ApproxReport {
            alpha: if dominated { max_ratio.max(1.0) } else { rescaled_alpha },
            dominated,
            worst_pair: (self.points[worst.0].clone(), self.points[worst.1].clone()),
            optimal_rescale: min_ratio,
            rescaled_alpha,
            max_ratio,
            min_ratio,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MetricJson {
            points: self.points.clone(),
            dist: self.matrix(),
        })
        .expect("serializable")
    }

    pub fn from_json(s: &str, tol: f64) -> Result<Self> {
        let m: MetricJson = serde_json::from_str(s)?;
        Self::validate(&m.dist, m.points, tol)
    }
}

/// Lower bound `r′/α` carried through an α-approximation.
pub fn transfer_bound(r_prime: f64, alpha: f64) -> Result<f64> {
    if alpha < 1.0 || alpha.is_nan() {
        return param(format!("approximation factor must be >= 1, got {alpha}"));
    }
    if !(r_prime > 0.0) {
        return param(format!("lower bound must be positive, got {r_prime}"));
    }
    Ok(r_prime / alpha)
}

/// `p`-norm selector; `Inf` is the max norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Norm {
    P(f64),
    Inf,
}

impl Norm {
    pub fn parse(s: &str) -> Result<Norm> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Norm::Inf),
            other => match other.parse::<f64>() {
                Ok(p) if p >= 1.0 && p.is_finite() => Ok(Norm::P(p)),
                Ok(p) if p.is_infinite() => Ok(Norm::Inf),
                _ => param(format!("norm must be a real >= 1 or `inf`, got `{s}`")),
            },
        }
    }

    pub fn dist<T: Copy + Into<f64>>(&self, a: &[T], b: &[T]) -> f64 {
        let diffs = a.iter().zip(b).map(|(&x, &y)| (x.into() - y.into()).abs());
        match *self {
            Norm::Inf => diffs.fold(0.0, f64::max),
            Norm::P(p) if p == 1.0 => diffs.sum(),
            Norm::P(p) if p == 2.0 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::P(p) => diffs.map(|d| d.powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    /// `h^{1/p}`, the norm of the all-ones vector in dimension `h`.
    pub fn ones_norm(&self, h: usize) -> f64 {
        match *self {
            Norm::Inf => 1.0,
            Norm::P(p) => (h as f64).powf(1.0 / p),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Norm::Inf => "inf".into(),
            Norm::P(p) => format!("{p}"),
        }
    }
}

pub const DEFAULT_POINT_BUDGET: usize = 1 << 20;

/// Number of points of `[s]^h`, or an error when it exceeds `budget`.
pub fn mesh_size(s: usize, h: usize, budget: usize) -> Result<usize> {
    let mut n: usize = 1;
    for _ in 0..h {
        n = n
            .checked_mul(s)
            .filter(|&n| n <= budget)
            .ok_or_else(|| Error::Budget(format!("mesh {s}^{h} exceeds {budget} points")))?;
    }
    if n > budget {
        return Err(Error::Budget(format!("mesh {s}^{h} exceeds {budget} points")));
    }
    Ok(n)
}

/// Mesh point id for coordinates, e.g. `"3,0,7"`.
pub fn coord_id(c: &[usize]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn uniform(b: usize, delta: f64) -> Result<MetricSpace> {
    if b == 0 || !(delta > 0.0) {
        return param("uniform needs b >= 1 and delta > 0");
    }
    Ok(MetricSpace::from_fn(
        (0..b).map(|i| i.to_string()).collect(),
        |_, _| delta,
    ))
}

pub fn path(n: usize, step: f64) -> Result<MetricSpace> {
    if n == 0 || !(step > 0.0) {
        return param("path needs n >= 1 and step > 0");
    }
    Ok(MetricSpace::from_fn(
        (0..n).map(|i| i.to_string()).collect(),
        |i, j| (j - i) as f64 * step,
    ))
}

/// `[s]^h` with `ℓ_p` distances; coordinates enumerated in lexicographic order.
pub fn mesh(s: usize, h: usize, norm: Norm, budget: usize) -> Result<MetricSpace> {
    if s == 0 || h == 0 {
        return param("mesh needs s >= 1 and h >= 1");
    }
    let n = mesh_size(s, h, budget)?;
    let coords: Vec<Vec<u32>> = (0..n)
        .map(|mut x| {
            let mut c = vec![0u32; h];
            for slot in c.iter_mut().rev() {
                *slot = (x % s) as u32;
                x /= s;
            }
            c
        })
        .collect();
    let ids = coords
        .iter()
        .map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    Ok(MetricSpace::from_fn(ids, |i, j| {
        norm.dist(&coords[i], &coords[j])
    }))
}

/// Random metric: shortest paths of a complete graph with weights in `[1, spread]`.
pub fn random_metric(n: usize, spread: f64, rng: &mut impl rand::Rng) -> MetricSpace {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.gen_range(1.0..=spread.max(1.0));
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    MetricSpace::from_fn((0..n).map(|i| i.to_string()).collect(), |i, j| d[i][j])
}

/// Random points in the unit square under the given norm.
pub fn random_euclidean(n: usize, norm: Norm, rng: &mut impl rand::Rng) -> MetricSpace {
    loop {
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
        let m = MetricSpace::from_fn((0..n).map(|i| i.to_string()).collect(), |i, j| {
            norm.dist(&pts[i], &pts[j])
        });
        if (0..n).all(|i| (0..n).all(|j| i == j || m.d(i, j) > 0.0)) {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn validate_examples() {
        assert_eq!(MetricSpace::validate(&[vec![0.0]], names(1), DEFAULT_TOL).unwrap().len(), 1);
        MetricSpace::validate(&[vec![0.0, 1.0], vec![1.0, 0.0]], names(2), DEFAULT_TOL).unwrap();
        let err = MetricSpace::validate(
            &[vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]],
            names(3),
            DEFAULT_TOL,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("triangle violation (0,2) via 1"), "{err}");
    }

    #[test]
    fn validate_rejections() {
        let bad = |m: Vec<Vec<f64>>| {
            let n = m.len();
            MetricSpace::validate(&m, names(n), DEFAULT_TOL).unwrap_err().to_string()
        };
        assert!(bad(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).contains("asymmetry"));
        assert!(bad(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).contains("negative"));
        assert!(bad(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).contains("zero off-diagonal"));
        assert!(MetricSpace::validate(&[], vec![], DEFAULT_TOL).is_err());
    }

    #[test]
    fn dedupe_collapses() {
        let m = MetricSpace::dedupe(
            &[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
            names(3),
            DEFAULT_TOL,
        )
        .unwrap();
        assert_eq!(m.points(), &["0".to_string(), "2".to_string()]);
    }

    #[test]
    fn restrict_examples() {
        let u = uniform(3, 1.0).unwrap();
        assert_eq!(u.restrict(&["0", "1"]).unwrap(), uniform(2, 1.0).unwrap());
        assert_eq!(u.restrict(u.points()).unwrap(), u);
        let p = path(4, 1.0).unwrap();
        assert_eq!(p.restrict(&["0", "3"]).unwrap().matrix(), vec![vec![0.0, 3.0], vec![3.0, 0.0]]);
        assert!(matches!(u.restrict(&["9"]), Err(Error::UnknownPoint(_))));
    }

    #[test]
    fn scale_examples() {
        assert_eq!(uniform(2, 1.0).unwrap().scale(2.0).unwrap(), uniform(2, 2.0).unwrap());
        let p = path(4, 1.0).unwrap();
        assert_eq!(p.scale(1.0).unwrap(), p);
        assert!(p.scale(0.0).is_err());
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(uniform(4, 5.0).unwrap().diameter().0, 5.0);
        assert_eq!(path(3, 1.0).unwrap().diameter(), (2.0, (0, 2)));
        assert_eq!(uniform(1, 1.0).unwrap().diameter(), (0.0, (0, 0)));
    }

    #[test]
    fn approximation_examples() {
        let r = uniform(3, 2.0).unwrap().approximation_factor(&uniform(3, 1.0).unwrap()).unwrap();
        assert!(r.dominated);
        assert_eq!(r.alpha, 2.0);
        let p = path(3, 1.0).unwrap();
        assert_eq!(p.approximation_factor(&p).unwrap().alpha, 1.0);
        let u = uniform(3, 1.0).unwrap();
        let r = p.approximation_factor(&u).unwrap();
        assert!(r.dominated);
        assert_eq!(r.alpha, 2.0);
        assert_eq!(r.worst_pair, ("0".into(), "2".into()));
        let r = u.approximation_factor(&p).unwrap();
        assert!(!r.dominated);
        assert_eq!(r.optimal_rescale, 0.5);
        assert_eq!(r.rescaled_alpha, 2.0);
    }

    #[test]
    fn transfer_examples() {
        assert_eq!(transfer_bound(10.0, 2.0).unwrap(), 5.0);
        assert_eq!(transfer_bound(7.0, 1.0).unwrap(), 7.0);
        assert_eq!(transfer_bound(3.0, 1.5).unwrap(), 2.0);
        assert!(transfer_bound(3.0, 0.5).is_err());
    }

    #[test]
    fn generators() {
        let u = uniform(3, 1.0).unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| u.d(i, j) == if i == j { 0.0 } else { 1.0 })));
        let p = path(4, 1.0).unwrap();
        assert_eq!(p.d(0, 3), 3.0);
        let m = mesh(2, 2, Norm::P(1.0), 100).unwrap();
        assert_eq!(m.len(), 4);
        assert_eq!(m.diameter().0, 2.0);
        assert!(matches!(mesh(10, 7, Norm::Inf, 1000), Err(Error::Budget(_))));
    }

    #[test]
    fn json_round_trip_bit_exact() {
        let mut rng = crate::rng::rng_from_seed(3);
        let m = random_euclidean(6, Norm::P(2.0), &mut rng);
        let back = MetricSpace::from_json(&m.to_json(), DEFAULT_TOL).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn norm_parse() {
        assert_eq!(Norm::parse("inf").unwrap(), Norm::Inf);
        assert_eq!(Norm::parse("2").unwrap(), Norm::P(2.0));
        assert!(Norm::parse("0.5").is_err());
    }
}
