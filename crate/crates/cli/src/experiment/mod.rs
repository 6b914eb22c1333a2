//! Named pipelines that compose the library into end-to-end checks.

mod adversary;
mod kserver;
mod line;
mod tight;

use crate::report::{Check, ExperimentReport};
use ramsey_mts::adversary::Constants;
use ramsey_mts::metric::DEFAULT_POINT_BUDGET;
use ramsey_mts::{Error, HstTree, Result};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::Instant;

pub use adversary::{HstLb, MeshLb};
pub use kserver::KserverLb;
pub use line::LineImpossibility;
pub use tight::TightExamples;

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: Option<usize>,
    pub tol: f64,
    pub budget_points: usize,
    pub constants: Constants,
    pub tree: Option<HstTree>,
    pub params: BTreeMap<String, String>,
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            trials: None,
            tol: 1e-9,
            budget_points: DEFAULT_POINT_BUDGET,
            constants: Constants::default(),
            tree: None,
            params: BTreeMap::new(),
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn param<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("param {key}: cannot parse `{v}`"))),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn list<T: FromStr>(&self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T: Clone,
    {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("param {key}: cannot parse `{x}`")))
                })
                .collect(),
        }
    }

    fn echo(&self, name: &str, trials: Option<usize>) -> Value {
        json!({
            "experiment": name,
            "seed": self.seed,
            "trials": trials,
            "tol": self.tol,
            "budget_points": self.budget_points,
            "tree": self.tree.as_ref().map(|t| serde_json::to_value(t).expect("tree serializes")),
            "params": self.params,
        })
    }
}

/// Raw results before the common envelope is added.
pub struct Outcome {
    pub trials: Option<usize>,
    pub runs: Vec<Value>,
    pub aggregate: Value,
    pub checks: Vec<Check>,
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn execute(&self, cfg: &ExperimentConfig) -> Result<Outcome>;
}

/// Runs `e` and wraps its outcome; wall-clock only with `cfg.timing`.
pub fn run_experiment(e: &dyn Experiment, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let out = e.execute(cfg)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let mut versions = Map::new();
    versions.insert("ramsey-mts".into(), json!(ramsey_mts::VERSION));
    versions.insert("ramsey-mts-cli".into(), json!(env!("CARGO_PKG_VERSION")));
    Ok(ExperimentReport {
        experiment: e.name().into(),
        versions,
        config: cfg.echo(e.name(), out.trials),
        constants: cfg.constants,
        pass: out.checks.iter().all(|c| c.pass),
        runs: out.runs,
        aggregate: out.aggregate,
        checks: out.checks,
        wall_clock_ms: cfg.timing.then_some(elapsed),
    })
}

pub fn registry() -> Vec<Box<dyn Experiment>> {
    vec![
        Box::new(MeshLb),
        Box::new(HstLb),
        Box::new(KserverLb),
        Box::new(LineImpossibility),
        Box::new(TightExamples),
    ]
}

pub fn experiment(name: &str) -> Result<Box<dyn Experiment>> {
    let all = registry();
    let known = all.iter().map(|e| e.name()).collect::<Vec<_>>().join(", ");
    all.into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "experiment",
            name: name.into(),
            known,
        })
}
