//! Lower-bound distributions over elementary task sequences.

mod estimate;
mod flexible;
mod hst;
mod uniform;

pub use estimate::{estimate_ratio, AlgorithmVerdict, Interval, RatioReport, StartStats, Z99};
pub use flexible::{child_blocks, combine, flexible_fair, flexible_uniform, flexible_uniform_ratios, flexify, ChildAdversary, FlexibleAdversary};
pub use hst::{hst_adversary, HstAdversary, VertexClaim};
pub use uniform::{
    composed_uniform_adversary, empty_adversary, fair_distribution, fair_uniform_adversary, harmonic, log_sum_exp_claim, ratios_from_sizes,
    unfair_uniform_adversary,
};

use crate::error::{param, Error, Result};
use crate::mts::{Task, Umts};
use crate::rng::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::sync::Arc;

/// Tunable constants of the lower-bound construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub rho: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for Constants {
    fn default() -> Self {
        let lambda1 = 1.0 / 180.0;
        let lambda2 = 13.0;
        let lambda3 = 100.0 * lambda2;
        let rho = lambda1 / (2.0 * 64.0 * std::f64::consts::E * lambda2);
        let c2 = 0.5 * rho;
        let c3 = 4.0 * lambda3;
        Constants {
            lambda1,
            lambda2,
            lambda3,
            rho,
            c1: 2.0 * c3,
            c2,
            c3,
        }
    }
}

impl Constants {
    /// Large `ρ`, small `λ₂`: exercises every code path at desk scale.
    pub fn aggressive() -> Constants {
        Constants {
            lambda1: 1.0 / 180.0,
            lambda2: 1.0,
            lambda3: 100.0,
            rho: 0.1,
            c1: 800.0,
            c2: 0.05,
            c3: 400.0,
        }
    }

    pub fn by_name(name: &str) -> Result<Constants> {
        match name {
            "default" => Ok(Constants::default()),
            "aggressive" => Ok(Constants::aggressive()),
            other => Err(Error::UnknownName {
                kind: "constants profile",
                name: other.into(),
                known: "default, aggressive".into(),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda1, self.lambda2, self.lambda3, self.rho, self.c1, self.c2, self.c3];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return param("constants must be positive and finite");
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Constants> {
        let c: Constants = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }
}

/// Seeded source of task sequences, in the adversary's own point indices.
pub trait Sampler: Send + Sync {
    fn sample_into(&self, rng: &mut Rng, out: &mut Vec<Task>);
    fn describe(&self) -> Value;
}

/// A samplable distribution with its claimed `(r, β)` and task coefficients.
#[derive(Clone)]
pub struct AdversarySpec {
    pub kind: &'static str,
    pub umts: Umts,
    pub delta: f64,
    pub r: f64,
    pub beta: f64,
    /// Task coefficients `α′_i`: every task at `i` costs `α′_i·Δ`. Empty when not discrete.
    pub alpha: Vec<f64>,
    pub eta: f64,
    pub params: Value,
    sampler: Arc<dyn Sampler>,
}

impl std::fmt::Debug for AdversarySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdversarySpec")
            .field("kind", &self.kind)
            .field("b", &self.umts.len())
            .field("delta", &self.delta)
            .field("r", &self.r)
            .field("beta", &self.beta)
            .field("alpha", &self.alpha)
            .field("eta", &self.eta)
            .finish()
    }
}

impl AdversarySpec {
    pub(crate) fn new(kind: &'static str, umts: Umts, delta: f64, r: f64, beta: f64, sampler: Arc<dyn Sampler>) -> Self {
        AdversarySpec {
            kind,
            umts,
            delta,
            r,
            beta,
            alpha: Vec::new(),
            eta: 1.0,
            params: json!({}),
            sampler,
        }
    }

    pub fn len(&self) -> usize {
        self.umts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.umts.is_empty()
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<Task> {
        let mut out = Vec::new();
        self.sampler.sample_into(rng, &mut out);
        out
    }

    pub fn sampler(&self) -> Arc<dyn Sampler> {
        self.sampler.clone()
    }

    /// Points in range, costs nonnegative, and for discrete adversaries each cost is `α′_i·Δ`.
    pub fn check_sample(&self, seq: &[Task]) -> Result<()> {
        self.umts.check_tasks(seq)?;
        if self.alpha.is_empty() {
            return Ok(());
        }
        for (k, t) in seq.iter().enumerate() {
            let want = self.alpha[t.point] * self.delta;
            if (t.cost - want).abs() > 1e-12 * want.abs().max(1.0) {
                return Err(Error::Invariant(format!(
                    "task {k} at point {} costs {} but the declared size is {want}",
                    t.point, t.cost
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "type": self.kind,
            "b": self.umts.len(),
            "delta": self.delta,
            "cost_ratios": self.umts.cost_ratios,
            "r": self.r,
            "beta": self.beta,
            "alpha": self.alpha,
            "eta": self.eta,
            "params": self.params,
            "sampler": self.sampler.describe(),
        })
    }
}

struct EmptySampler;

impl Sampler for EmptySampler {
    fn sample_into(&self, _: &mut Rng, _: &mut Vec<Task>) {}
    fn describe(&self) -> Value {
        json!({"type": "empty"})
    }
}

/// Concatenated prefixes of a uniformly random permutation, each task of size `cost`.
struct FairSampler {
    b: usize,
    cost: f64,
}

impl Sampler for FairSampler {
    fn sample_into(&self, rng: &mut Rng, out: &mut Vec<Task>) {
        use rand::seq::SliceRandom;
        let mut pi: Vec<usize> = (0..self.b).collect();
        pi.shuffle(rng);
        for i in 1..=self.b {
            out.extend(pi[..i].iter().map(|&v| Task::new(v, self.cost)));
        }
    }
    fn describe(&self) -> Value {
        json!({"type": "fair", "b": self.b, "cost": self.cost})
    }
}

/// `m` independent tasks at uniform points, the task at `i` costing `costs[i]`.
struct IidSampler {
    m: usize,
    costs: Vec<f64>,
}

impl Sampler for IidSampler {
    fn sample_into(&self, rng: &mut Rng, out: &mut Vec<Task>) {
        use rand::Rng as _;
        let b = self.costs.len();
        out.extend((0..self.m).map(|_| {
            let v = rng.gen_range(0..b);
            Task::new(v, self.costs[v])
        }));
    }
    fn describe(&self) -> Value {
        json!({"type": "iid", "m": self.m, "costs": self.costs})
    }
}

/// Every task cost multiplied by `gamma`.
struct ScaledSampler {
    inner: Arc<dyn Sampler>,
    gamma: f64,
}

impl Sampler for ScaledSampler {
    fn sample_into(&self, rng: &mut Rng, out: &mut Vec<Task>) {
        let start = out.len();
        self.inner.sample_into(rng, out);
        for t in &mut out[start..] {
            t.cost *= self.gamma;
        }
    }
    fn describe(&self) -> Value {
        json!({"type": "scaled", "gamma": self.gamma, "inner": self.inner.describe()})
    }
}

pub(crate) enum Part {
    /// Single point: the task passes through unchanged.
    Leaf(usize),
    /// `t` independent child samples, child index `i` mapped to `map[i]`.
    Blocks { map: Vec<usize>, t: usize, sampler: Arc<dyn Sampler> },
}

/// Replaces each task `(z_j, ·)` of the combining sequence by the part for child `j`.
struct CombinedSampler {
    top: Arc<dyn Sampler>,
    parts: Vec<Part>,
}

impl Sampler for CombinedSampler {
    fn sample_into(&self, rng: &mut Rng, out: &mut Vec<Task>) {
        let mut top = Vec::new();
        self.top.sample_into(rng, &mut top);
        let mut buf = Vec::new();
        for task in top {
            match &self.parts[task.point] {
                Part::Leaf(p) => out.push(Task::new(*p, task.cost)),
                Part::Blocks { map, t, sampler } => {
                    for _ in 0..*t {
                        buf.clear();
                        sampler.sample_into(rng, &mut buf);
                        out.extend(buf.iter().map(|c| Task::new(map[c.point], c.cost)));
                    }
                }
            }
        }
    }
    fn describe(&self) -> Value {
        let parts: Vec<Value> = self
            .parts
            .iter()
            .map(|p| match p {
                Part::Leaf(v) => json!({"leaf": v}),
                Part::Blocks { map, t, sampler } => json!({"points": map, "t": t, "child": sampler.describe()}),
            })
            .collect();
        json!({"type": "combined", "top": self.top.describe(), "parts": parts})
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_constants() {
        let c = Constants::default();
        assert!((c.rho - 1.2275e-6).abs() < 1e-9, "{}", c.rho);
        assert_eq!(c.lambda3, 1300.0);
        assert_eq!(c.c1, 2.0 * c.c3);
        assert_eq!(c.c2, 0.5 * c.rho);
        let back = Constants::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(Constants::by_name("nope").is_err());
        let mut bad = c;
        bad.rho = 0.0;
        assert!(bad.validate().is_err());
    }
}
