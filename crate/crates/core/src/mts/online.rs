use super::{Task, Umts, WorkFunction};
use crate::error::{Error, Result};
use crate::rng::Rng;
use rand::Rng as _;
use serde::Serialize;
use std::sync::Arc;

/// A (possibly randomized) online strategy; `begin` creates per-run state.
pub trait OnlineAlgorithm: Send + Sync {
    fn name(&self) -> &'static str;
    fn begin(&self, u: &Umts, u0: usize) -> Box<dyn OnlineStep>;
}

/// Per-run state: sees the task, returns the point to serve it from.
pub trait OnlineStep {
    fn step(&mut self, u: &Umts, task: &Task, current: usize, rng: &mut Rng) -> usize;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CostReport {
    pub total: f64,
    pub moving: f64,
    pub local: f64,
    pub moves: usize,
}

/// Moves first, then pays the local cost at the destination.
pub fn run_online(alg: &dyn OnlineAlgorithm, u: &Umts, seq: &[Task], u0: usize, rng: &mut Rng) -> Result<CostReport> {
    if u0 >= u.len() {
        return Err(Error::UnknownPoint(format!("start point {u0}")));
    }
    u.check_tasks(seq)?;
    let mut state = alg.begin(u, u0);
    let mut cur = u0;
    let mut rep = CostReport::default();
    for t in seq {
        let next = state.step(u, t, cur, rng);
        if next >= u.len() {
            return Err(Error::Invariant(format!("{} moved to invalid point {next}", alg.name())));
        }
        if next != cur {
            rep.moving += u.distance_ratio * u.metric.d(cur, next);
            rep.moves += 1;
            cur = next;
        }
        if t.point == cur {
            rep.local += u.cost_ratios[cur] * t.cost;
        }
    }
    rep.total = rep.moving + rep.local;
    Ok(rep)
}

struct StayPut;

impl OnlineAlgorithm for StayPut {
    fn name(&self) -> &'static str {
        "stay_put"
    }
    fn begin(&self, _: &Umts, _: usize) -> Box<dyn OnlineStep> {
        Box::new(StayPut)
    }
}

impl OnlineStep for StayPut {
    fn step(&mut self, _: &Umts, _: &Task, current: usize, _: &mut Rng) -> usize {
        current
    }
}

/// Jumps to a uniformly random other point whenever its own point is hit.
struct RandomJump;

impl OnlineAlgorithm for RandomJump {
    fn name(&self) -> &'static str {
        "random_jump"
    }
    fn begin(&self, _: &Umts, _: usize) -> Box<dyn OnlineStep> {
        Box::new(RandomJump)
    }
}

impl OnlineStep for RandomJump {
    fn step(&mut self, u: &Umts, t: &Task, current: usize, rng: &mut Rng) -> usize {
        if t.point != current || t.cost <= 0.0 || u.len() < 2 {
            return current;
        }
        let j = rng.gen_range(0..u.len() - 1);
        if j >= current {
            j + 1
        } else {
            j
        }
    }
}

/// Marking: a point is marked once its online local cost reaches `s` times its
/// nearest-neighbour distance; phases reset when every point is marked.
struct Marking;

struct MarkingState {
    load: Vec<f64>,
    threshold: Vec<f64>,
    marked: Vec<bool>,
}

impl OnlineAlgorithm for Marking {
    fn name(&self) -> &'static str {
        "marking"
    }
    fn begin(&self, u: &Umts, _: usize) -> Box<dyn OnlineStep> {
        let n = u.len();
        let threshold = (0..n)
            .map(|i| {
                let nn = (0..n).filter(|&j| j != i).map(|j| u.metric.d(i, j)).fold(f64::INFINITY, f64::min);
                u.distance_ratio * if nn.is_finite() { nn } else { 0.0 }
            })
            .collect();
        Box::new(MarkingState {
            load: vec![0.0; n],
            threshold,
            marked: vec![false; n],
        })
    }
}

impl OnlineStep for MarkingState {
    fn step(&mut self, u: &Umts, t: &Task, current: usize, rng: &mut Rng) -> usize {
        let n = u.len();
        self.load[t.point] += u.cost_ratios[t.point] * t.cost;
        if self.load[t.point] >= self.threshold[t.point] && t.cost > 0.0 {
            self.marked[t.point] = true;
        }
        if !self.marked[current] || n < 2 {
            return current;
        }
        if self.marked.iter().all(|&m| m) {
            self.marked.iter_mut().for_each(|m| *m = false);
            self.load.iter_mut().for_each(|l| *l = 0.0);
        }
        let free: Vec<usize> = (0..n).filter(|&j| !self.marked[j] && j != current).collect();
        if free.is_empty() {
            return current;
        }
        free[rng.gen_range(0..free.len())]
    }
}

/// Work-function rule on the online cost model: `argmin_j w(j) + s·d(current, j)`.
struct WfaLike;

struct WfaState {
    w: WorkFunction<f64>,
    scaled: crate::metric::MetricSpace,
}

impl OnlineAlgorithm for WfaLike {
    fn name(&self) -> &'static str {
        "wfa_like"
    }
    fn begin(&self, u: &Umts, u0: usize) -> Box<dyn OnlineStep> {
        let scaled = u.metric.scale(u.distance_ratio).expect("positive ratio");
        Box::new(WfaState {
            w: WorkFunction::new(&scaled, u0).expect("valid start"),
            scaled,
        })
    }
}

impl OnlineStep for WfaState {
    fn step(&mut self, u: &Umts, t: &Task, current: usize, _: &mut Rng) -> usize {
        let task = Task::new(t.point, u.cost_ratios[t.point] * t.cost);
        self.w.update(&self.scaled, &task);
        let score = |j: usize| self.w.values[j] + self.scaled.d(current, j);
        let mut best = current;
        for j in 0..u.len() {
            if score(j) < score(best) {
                best = j;
            }
        }
        best
    }
}

pub const BUILTIN_ALGORITHMS: [&str; 4] = ["stay_put", "random_jump", "marking", "wfa_like"];

pub fn builtin_algorithm(name: &str) -> Result<Arc<dyn OnlineAlgorithm>> {
    Ok(match name {
        "stay_put" => Arc::new(StayPut),
        "random_jump" => Arc::new(RandomJump),
        "marking" => Arc::new(Marking),
        "wfa_like" => Arc::new(WfaLike),
        other => {
            return Err(Error::UnknownName {
                kind: "online algorithm",
                name: other.into(),
                known: BUILTIN_ALGORITHMS.join(", "),
            })
        }
    })
}

pub fn builtin_algorithms() -> Vec<Arc<dyn OnlineAlgorithm>> {
    BUILTIN_ALGORITHMS
        .iter()
        .map(|n| builtin_algorithm(n).expect("builtin"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::uniform;
    use crate::mts::opt_cost;
    use crate::rng::rng_from_seed;

    fn fair_seq() -> Vec<Task> {
        [0, 0, 1, 0, 1, 2].iter().map(|&i| Task::new(i, 1.0)).collect()
    }

    #[test]
    fn stay_put_examples() {
        let u = Umts::fair(uniform(3, 1.0).unwrap());
        let alg = builtin_algorithm("stay_put").unwrap();
        let mut rng = rng_from_seed(0);
        let away: Vec<Task> = vec![Task::new(1, 4.0), Task::new(2, 1.0)];
        assert_eq!(run_online(&*alg, &u, &away, 0, &mut rng).unwrap().total, 0.0);
        let rep = run_online(&*alg, &u, &fair_seq(), 0, &mut rng).unwrap();
        assert_eq!((rep.local, rep.moving), (3.0, 0.0));
    }

    #[test]
    fn empty_sequence_is_free() {
        let u = Umts::fair(uniform(3, 1.0).unwrap());
        for alg in builtin_algorithms() {
            let rep = run_online(&*alg, &u, &[], 1, &mut rng_from_seed(1)).unwrap();
            assert_eq!(rep, CostReport::default());
        }
    }

    #[test]
    fn costs_at_least_opt() {
        let u = Umts::fair(crate::metric::path(5, 1.0).unwrap());
        let mut rng = rng_from_seed(9);
        for _ in 0..50 {
            let seq: Vec<Task> = (0..12)
                .map(|_| Task::new(rng.gen_range(0..5), rng.gen_range(0.0..3.0)))
                .collect();
            let opt = opt_cost(&u.metric, &seq, 0).unwrap();
            for alg in builtin_algorithms() {
                let rep = run_online(&*alg, &u, &seq, 0, &mut rng).unwrap();
                assert!(rep.total >= opt - 1e-9, "{} {} < {}", alg.name(), rep.total, opt);
                assert!((rep.total - rep.moving - rep.local).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(builtin_algorithm("oracle"), Err(Error::UnknownName { .. })));
    }

    #[test]
    fn marking_moves_off_marked_point() {
        let u = Umts::fair(uniform(3, 1.0).unwrap());
        let alg = builtin_algorithm("marking").unwrap();
        let rep = run_online(&*alg, &u, &[Task::new(0, 1.0)], 0, &mut rng_from_seed(2)).unwrap();
        assert_eq!(rep.moves, 1);
        assert_eq!(rep.local, 0.0);
    }
}
