//! (Unfair) metrical task systems: work functions, offline optima and online execution.

mod expectimax;
mod online;
mod work;

pub use expectimax::{expectimax_online_opt, Distribution, MAX_EXPECTIMAX_STATES};
pub use online::{
    builtin_algorithm, builtin_algorithms, run_online, CostReport, OnlineAlgorithm, OnlineStep,
    BUILTIN_ALGORITHMS,
};
pub use work::{opt0_cost, opt_cost, opt_costs, WorkFunction};

use crate::error::{param, Error, Result};
use crate::metric::MetricSpace;
use serde::{Deserialize, Serialize};

/// Elementary task: cost `cost` at point `point`, zero elsewhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    #[serde(rename = "i")]
    pub point: usize,
    #[serde(rename = "c")]
    pub cost: f64,
}

impl Task {
    pub fn new(point: usize, cost: f64) -> Task {
        Task { point, cost }
    }
}

pub type TaskSequence = Vec<Task>;

/// One task per line.
pub fn tasks_to_jsonl(seq: &[Task]) -> String {
    seq.iter()
        .map(|t| serde_json::to_string(t).expect("task serializes") + "\n")
        .collect()
}

pub fn tasks_from_jsonl(s: &str) -> Result<TaskSequence> {
    s.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Metric with per-point cost ratios `r_i` and distance ratio `s`.
#[derive(Clone, Debug)]
pub struct Umts {
    pub metric: MetricSpace,
    pub cost_ratios: Vec<f64>,
    pub distance_ratio: f64,
}

impl Umts {
    pub fn new(metric: MetricSpace, cost_ratios: Vec<f64>, distance_ratio: f64) -> Result<Umts> {
        if cost_ratios.len() != metric.len() {
            return Err(Error::Mismatch(format!(
                "{} cost ratios for {} points",
                cost_ratios.len(),
                metric.len()
            )));
        }
        if cost_ratios.iter().any(|&r| !(r >= 0.0 && r.is_finite())) {
            return param("cost ratios must be finite and nonnegative");
        }
        if !(distance_ratio > 0.0 && distance_ratio.is_finite()) {
            return param(format!("distance ratio must be positive, got {distance_ratio}"));
        }
        Ok(Umts {
            metric,
            cost_ratios,
            distance_ratio,
        })
    }

    /// Ordinary MTS: `r ≡ 1`, `s = 1`.
    pub fn fair(metric: MetricSpace) -> Umts {
        let b = metric.len();
        Umts {
            metric,
            cost_ratios: vec![1.0; b],
            distance_ratio: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.metric.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metric.is_empty()
    }

    /// `(M; r/s; 1)` together with the conversion factor `s`.
    pub fn normalize(&self) -> (Umts, f64) {
        let s = self.distance_ratio;
        (
            Umts {
                metric: self.metric.clone(),
                cost_ratios: self.cost_ratios.iter().map(|r| r / s).collect(),
                distance_ratio: 1.0,
            },
            s,
        )
    }

    pub(crate) fn check_tasks(&self, seq: &[Task]) -> Result<()> {
        for (k, t) in seq.iter().enumerate() {
            if t.point >= self.len() {
                return Err(Error::UnknownPoint(format!("task {k} names point {}", t.point)));
            }
            if !(t.cost >= 0.0) {
                return param(format!("task {k} has negative cost {}", t.cost));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::uniform;

    #[test]
    fn normalize_examples() {
        let m = uniform(2, 1.0).unwrap();
        let u = Umts::new(m.clone(), vec![4.0, 2.0], 2.0).unwrap();
        let (v, s) = u.normalize();
        assert_eq!(s, 2.0);
        assert_eq!(v.cost_ratios, vec![2.0, 1.0]);
        assert_eq!(v.distance_ratio, 1.0);
        let (w, s2) = v.normalize();
        assert_eq!((w.cost_ratios, s2), (vec![2.0, 1.0], 1.0));
        let f = Umts::fair(m);
        assert_eq!(f.normalize().0.cost_ratios, f.cost_ratios);
        assert!(Umts::new(uniform(2, 1.0).unwrap(), vec![1.0, 1.0], 0.0).is_err());
        assert!(Umts::new(uniform(2, 1.0).unwrap(), vec![1.0], 1.0).is_err());
    }

    #[test]
    fn jsonl_roundtrip() {
        let seq = vec![Task::new(0, 1.5), Task::new(2, 0.1)];
        let s = tasks_to_jsonl(&seq);
        assert_eq!(s.lines().next().unwrap(), r#"{"i":0,"c":1.5}"#);
        assert_eq!(tasks_from_jsonl(&s).unwrap(), seq);
    }
}
