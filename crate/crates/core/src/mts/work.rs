use super::Task;
use crate::error::{param, Error, Result};
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

/// `w(i)`: cheapest offline cost of serving the tasks so far and ending at `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkFunction<S> {
    pub values: Vec<S>,
    pub base: usize,
}

impl<S: Scalar> WorkFunction<S> {
    /// Seeded with `w(i) = d(u₀, i)`.
    pub fn new(m: &MetricSpace, u0: usize) -> Result<WorkFunction<S>> {
        if u0 >= m.len() {
            return Err(Error::UnknownPoint(format!("start point {u0}")));
        }
        Ok(WorkFunction {
            values: (0..m.len()).map(|i| S::from_f64(m.d(u0, i))).collect(),
            base: u0,
        })
    }

    /// Elementary task `(v, δ)`; only `w(v)` can change.
    pub fn update(&mut self, m: &MetricSpace, task: &Task) {
        let v = task.point;
        let mut best = self.values[v].clone() + S::from_f64(task.cost);
        for (j, w) in self.values.iter().enumerate() {
            if j != v {
                let via = w.clone() + S::from_f64(m.d(j, v));
                if via < best {
                    best = via;
                }
            }
        }
        self.values[v] = best;
    }

    /// General cost vector: `w′(i) = min_j (w(j) + c_j + d(j,i))`; infinite entries forbid `j`.
    pub fn update_vector(&mut self, m: &MetricSpace, costs: &[f64]) -> Result<()> {
        if costs.len() != self.values.len() {
            return Err(Error::Mismatch(format!(
                "{} costs for {} points",
                costs.len(),
                self.values.len()
            )));
        }
        if costs.iter().any(|c| c.is_nan() || *c < 0.0) {
            return param("task costs must be nonnegative");
        }
        let finite: Vec<usize> = (0..costs.len()).filter(|&j| costs[j].is_finite()).collect();
        if finite.is_empty() {
            return param("a task must have at least one finite cost");
        }
        let base: Vec<S> = finite
            .iter()
            .map(|&j| self.values[j].clone() + S::from_f64(costs[j]))
            .collect();
        self.values = (0..costs.len())
            .map(|i| {
                finite
                    .iter()
                    .zip(&base)
                    .map(|(&j, b)| b.clone() + S::from_f64(m.d(j, i)))
                    .reduce(S::min_of)
                    .expect("nonempty")
            })
            .collect();
        Ok(())
    }

    pub fn opt(&self) -> S {
        self.values.iter().cloned().reduce(S::min_of).expect("nonempty")
    }

    /// Cheapest cost that also returns to the base point.
    pub fn opt0(&self, m: &MetricSpace) -> S {
        self.values
            .iter()
            .enumerate()
            .map(|(i, w)| w.clone() + S::from_f64(m.d(i, self.base)))
            .reduce(S::min_of)
            .expect("nonempty")
    }

    /// `|w(i) − w(j)| ≤ d(i,j)` up to relative slack `tol`.
    pub fn is_lipschitz(&self, m: &MetricSpace, tol: f64) -> bool {
        let n = self.values.len();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let diff = (self.values[i].to_f64() - self.values[j].to_f64()).abs();
                diff <= m.d(i, j) * (1.0 + tol) + tol
            })
        })
    }
}

/// `(opt, opt⁰)` of a sequence from `u₀`.
pub fn opt_costs<S: Scalar>(m: &MetricSpace, seq: &[Task], u0: usize) -> Result<(S, S)> {
    let mut w = WorkFunction::<S>::new(m, u0)?;
    for t in seq {
        if t.point >= m.len() {
            return Err(Error::UnknownPoint(format!("task point {}", t.point)));
        }
        w.update(m, t);
    }
    Ok((w.opt(), w.opt0(m)))
}

pub fn opt_cost(m: &MetricSpace, seq: &[Task], u0: usize) -> Result<f64> {
    Ok(opt_costs::<f64>(m, seq, u0)?.0)
}

pub fn opt0_cost(m: &MetricSpace, seq: &[Task], u0: usize) -> Result<f64> {
    Ok(opt_costs::<f64>(m, seq, u0)?.1)
}
