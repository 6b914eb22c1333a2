//! MTS on `n` points reduced to `n−1` servers on the same points; a configuration is its
//! uncovered point (the hole).

use crate::error::{param, Error, Result};
use crate::metric::MetricSpace;
use crate::mts::{Task, WorkFunction};
use crate::rng::Rng;
use crate::scalar::Scalar;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Request line of the JSONL format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub point: String,
}

pub fn requests_to_jsonl(m: &MetricSpace, reqs: &[usize]) -> String {
    reqs.iter()
        .map(|&i| {
            serde_json::to_string(&Request {
                point: m.points()[i].clone(),
            })
            .expect("request serializes")
                + "\n"
        })
        .collect()
}

pub fn requests_from_jsonl(m: &MetricSpace, s: &str) -> Result<Vec<usize>> {
    s.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let r: Request = serde_json::from_str(l)?;
            m.index_of(&r.point)
        })
        .collect()
}

/// An `(n−1)`-server algorithm; `begin` creates per-run state.
pub trait ServerAlgorithm: Send + Sync {
    fn name(&self) -> &'static str;
    fn begin(&self, m: &MetricSpace, hole: usize) -> Box<dyn ServerStep>;
}

/// Receives a request and the current hole, returns the new hole (never the request).
pub trait ServerStep {
    fn step(&mut self, m: &MetricSpace, request: usize, hole: usize, rng: &mut Rng) -> usize;
}

/// Lazy: only a request at the hole moves a server, the closest one.
struct Greedy;

impl ServerAlgorithm for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }
    fn begin(&self, _: &MetricSpace, _: usize) -> Box<dyn ServerStep> {
        Box::new(Greedy)
    }
}

impl ServerStep for Greedy {
    fn step(&mut self, m: &MetricSpace, request: usize, hole: usize, _: &mut Rng) -> usize {
        if request != hole {
            return hole;
        }
        (0..m.len())
            .filter(|&j| j != hole)
            .min_by(|&a, &b| m.d(a, hole).total_cmp(&m.d(b, hole)))
            .expect("n >= 2")
    }
}

/// Moves the server minimizing travelled distance plus the distance to the request.
struct Balance;

struct BalanceState {
    /// Distance travelled by the server currently at each point.
    travel: Vec<f64>,
}

impl ServerAlgorithm for Balance {
    fn name(&self) -> &'static str {
        "balance"
    }
    fn begin(&self, m: &MetricSpace, _: usize) -> Box<dyn ServerStep> {
        Box::new(BalanceState {
            travel: vec![0.0; m.len()],
        })
    }
}

impl ServerStep for BalanceState {
    fn step(&mut self, m: &MetricSpace, request: usize, hole: usize, _: &mut Rng) -> usize {
        if request != hole {
            return hole;
        }
        let score = |j: usize| self.travel[j] + m.d(j, hole);
        let j = (0..m.len())
            .filter(|&j| j != hole)
            .min_by(|&a, &b| score(a).total_cmp(&score(b)))
            .expect("n >= 2");
        self.travel[hole] = score(j);
        self.travel[j] = 0.0;
        j
    }
}

/// Randomized: server at `j` moves with probability proportional to `1/d(j, request)`.
struct Harmonic;

impl ServerAlgorithm for Harmonic {
    fn name(&self) -> &'static str {
        "harmonic"
    }
    fn begin(&self, _: &MetricSpace, _: usize) -> Box<dyn ServerStep> {
        Box::new(Harmonic)
    }
}

impl ServerStep for Harmonic {
    fn step(&mut self, m: &MetricSpace, request: usize, hole: usize, rng: &mut Rng) -> usize {
        if request != hole {
            return hole;
        }
        let cands: Vec<usize> = (0..m.len()).filter(|&j| j != hole).collect();
        let weights: Vec<f64> = cands.iter().map(|&j| 1.0 / m.d(j, hole)).collect();
        let total: f64 = weights.iter().sum();
        let mut x = rng.gen::<f64>() * total;
        for (&j, w) in cands.iter().zip(&weights) {
            if x < *w {
                return j;
            }
            x -= w;
        }
        *cands.last().expect("n >= 2")
    }
}

pub const SERVER_ALGORITHMS: [&str; 3] = ["greedy", "balance", "harmonic"];

pub fn server_algorithm(name: &str) -> Result<Arc<dyn ServerAlgorithm>> {
    Ok(match name {
        "greedy" => Arc::new(Greedy),
        "balance" => Arc::new(Balance),
        "harmonic" => Arc::new(Harmonic),
        other => {
            return Err(Error::UnknownName {
                kind: "server algorithm",
                name: other.into(),
                known: SERVER_ALGORITHMS.join(", "),
            })
        }
    })
}

/// Request at `i` iff `w(i) + δ ≥ min_{j≠i} w(j) + d(i,j)`.
pub fn reduce_task<S: Scalar>(wt: &WorkFunction<S>, task: &Task, m: &MetricSpace) -> Option<usize> {
    let i = task.point;
    let lhs = wt.values[i].clone() + S::from_f64(task.cost);
    let rhs = (0..m.len())
        .filter(|&j| j != i)
        .map(|j| wt.values[j].clone() + S::from_f64(m.d(i, j)))
        .reduce(S::min_of)?;
    (lhs >= rhs).then_some(i)
}

/// Work function of the `(n−1)`-server problem indexed by the hole.
#[derive(Clone, Debug, PartialEq)]
pub struct ServerWork<S> {
    pub values: Vec<S>,
}

impl<S: Scalar> ServerWork<S> {
    pub fn new(m: &MetricSpace, hole: usize) -> ServerWork<S> {
        ServerWork {
            values: (0..m.len()).map(|i| S::from_f64(m.d(hole, i))).collect(),
        }
    }

    /// `w′(l) = min_{j≠l} w(j) + d(l,j)`; other entries unchanged.
    pub fn update(&mut self, m: &MetricSpace, l: usize) {
        if let Some(v) = (0..m.len())
            .filter(|&j| j != l)
            .map(|j| self.values[j].clone() + S::from_f64(m.d(l, j)))
            .reduce(S::min_of)
        {
            self.values[l] = v;
        }
    }

    pub fn opt(&self) -> S {
        self.values.iter().cloned().reduce(S::min_of).expect("nonempty")
    }
}

/// Offline optimum of `n−1` servers starting with the hole at `hole`.
pub fn server_opt<S: Scalar>(m: &MetricSpace, requests: &[usize], hole: usize) -> Result<S> {
    check_start(m, hole)?;
    let mut w = ServerWork::<S>::new(m, hole);
    for &r in requests {
        if r >= m.len() {
            return Err(Error::UnknownPoint(format!("request at {r}")));
        }
        w.update(m, r);
    }
    Ok(w.opt())
}

fn check_start(m: &MetricSpace, hole: usize) -> Result<()> {
    if m.len() < 2 {
        return param("the reduction needs at least 2 points");
    }
    if hole >= m.len() {
        return Err(Error::UnknownPoint(format!("start point {hole}")));
    }
    Ok(())
}

/// Offline `K`-server optimum by DP over all `K`-subsets, exhaustive (n ≤ 8, K ≤ 5).
pub fn kserver_opt_bruteforce(m: &MetricSpace, start: &[usize], requests: &[usize]) -> Result<f64> {
    let n = m.len();
    let k = start.len();
    if n > 8 || k == 0 || k > 5 || k > n {
        return Err(Error::Budget("brute force limited to n <= 8 and 1 <= K <= 5".into()));
    }
    let mut sorted = start.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != k || sorted.iter().any(|&p| p >= n) {
        return param("start configuration must be K distinct points");
    }
    let configs: Vec<u32> = (0u32..1 << n).filter(|c| c.count_ones() as usize == k).collect();
    let pts = |c: u32| -> Vec<usize> { (0..n).filter(|i| c >> i & 1 == 1).collect() };
    let matching = |a: u32, b: u32| -> f64 {
        let (pa, pb) = (pts(a), pts(b));
        let mut best = f64::INFINITY;
        permutations(k, &mut |perm| {
            let c: f64 = perm.iter().enumerate().map(|(x, &y)| m.d(pa[x], pb[y])).sum();
            best = best.min(c);
        });
        best
    };
    let idx = |c: u32| configs.iter().position(|&x| x == c).expect("config");
    let nc = configs.len();
    let mut moves = vec![0.0; nc * nc];
    for a in 0..nc {
        for b in 0..nc {
            moves[a * nc + b] = matching(configs[a], configs[b]);
        }
    }
    let s0 = sorted.iter().fold(0u32, |c, &p| c | 1 << p);
    let mut cost = vec![f64::INFINITY; nc];
    cost[idx(s0)] = 0.0;
    for &r in requests {
        if r >= n {
            return Err(Error::UnknownPoint(format!("request at {r}")));
        }
        let next: Vec<f64> = (0..nc)
            .map(|b| {
                if configs[b] >> r & 1 == 0 {
                    return f64::INFINITY;
                }
                (0..nc).map(|a| cost[a] + moves[a * nc + b]).fold(f64::INFINITY, f64::min)
            })
            .collect();
        cost = next;
    }
    Ok(cost.into_iter().fold(f64::INFINITY, f64::min))
}

fn permutations(k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(p: &mut Vec<usize>, used: &mut [bool], f: &mut impl FnMut(&[usize])) {
        if p.len() == used.len() {
            f(p);
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                p.push(i);
                go(p, used, f);
                p.pop();
                used[i] = false;
            }
        }
    }
    go(&mut Vec::with_capacity(k), &mut vec![false; k], f);
}

/// State after one MTS task.
#[derive(Clone, Debug)]
pub struct ReductionStep<S> {
    pub task: Task,
    pub request: Option<usize>,
    /// Hole of `A_S`, which is the state of `A_T`.
    pub hole: usize,
    pub w_s: Vec<S>,
    pub w_t: Vec<S>,
    /// Running local cost of `A_T`.
    pub lcost: S,
    /// Running movement cost, shared by `A_T` and `A_S`.
    pub mcost: S,
}

#[derive(Clone, Debug)]
pub struct ReductionTrace<S> {
    pub algorithm: String,
    pub start: usize,
    pub diameter: f64,
    pub requests: Vec<usize>,
    pub steps: Vec<ReductionStep<S>>,
    pub initial_w: Vec<S>,
}

impl<S: Scalar> ReductionTrace<S> {
    pub fn lcost(&self) -> S {
        self.steps.last().map_or(S::zero(), |s| s.lcost.clone())
    }

    pub fn mcost(&self) -> S {
        self.steps.last().map_or(S::zero(), |s| s.mcost.clone())
    }

    /// `cost_{A_T}(τ)`.
    pub fn cost_t(&self) -> S {
        self.lcost() + self.mcost()
    }

    /// `cost_{A_S}(σ)`, equal to the movement cost.
    pub fn cost_s(&self) -> S {
        self.mcost()
    }

    /// `opt_T(τ) = min_i w^T(i)`.
    pub fn opt_t(&self) -> S {
        let w = self.steps.last().map_or(&self.initial_w, |s| &s.w_t);
        w.iter().cloned().reduce(S::min_of).expect("nonempty")
    }

    pub fn opt_s(&self) -> S {
        let w = self.steps.last().map_or(&self.initial_w, |s| &s.w_s);
        w.iter().cloned().reduce(S::min_of).expect("nonempty")
    }
}

/// Builds `σ` from `τ` obliviously, runs `A_S` on it and follows its hole.
pub fn run_reduction<S: Scalar>(
    alg: &dyn ServerAlgorithm,
    m: &MetricSpace,
    tau: &[Task],
    start: usize,
    rng: &mut Rng,
) -> Result<ReductionTrace<S>> {
    check_start(m, start)?;
    for (k, t) in tau.iter().enumerate() {
        if t.point >= m.len() {
            return Err(Error::UnknownPoint(format!("task {k} names point {}", t.point)));
        }
        if !(t.cost >= 0.0) {
            return param(format!("task {k} has negative cost {}", t.cost));
        }
    }
    let mut wt = WorkFunction::<S>::new(m, start)?;
    let mut ws = ServerWork::<S>::new(m, start);
    let mut state = alg.begin(m, start);
    let mut hole = start;
    let (mut lcost, mut mcost) = (S::zero(), S::zero());
    let mut steps = Vec::with_capacity(tau.len());
    let mut requests = Vec::new();
    let initial_w = wt.values.clone();
    for t in tau {
        let request = reduce_task(&wt, t, m);
        if let Some(l) = request {
            requests.push(l);
            ws.update(m, l);
            let next = state.step(m, l, hole, rng);
            if next >= m.len() || next == l {
                return Err(Error::Invariant(format!("{} left request {l} unserved", alg.name())));
            }
            mcost = mcost + S::from_f64(m.d(hole, next));
            hole = next;
        }
        if hole == t.point {
            lcost = lcost + S::from_f64(t.cost);
        }
        wt.update(m, t);
        steps.push(ReductionStep {
            task: *t,
            request,
            hole,
            w_s: ws.values.clone(),
            w_t: wt.values.clone(),
            lcost: lcost.clone(),
            mcost: mcost.clone(),
        });
    }
    Ok(ReductionTrace {
        algorithm: alg.name().to_string(),
        start,
        diameter: m.diameter().0,
        requests,
        steps,
        initial_w,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RelationReport {
    pub steps: usize,
    pub requests: usize,
    pub domination_violations: usize,
    pub ledger_violations: usize,
    pub final_ok: bool,
    /// `(step, what)` of the first failure.
    pub first_violation: Option<(usize, String)>,
    pub cost_t: f64,
    pub cost_s: f64,
    pub opt_t: f64,
    pub opt_s: f64,
}

impl RelationReport {
    pub fn ok(&self) -> bool {
        self.domination_violations == 0 && self.ledger_violations == 0 && self.final_ok
    }
}

/// Stepwise `w^S ≤ w^T` and `lcost ≤ mcost + w^T(i_c)`, then
/// `cost_T ≤ 2·cost_S + opt_T + Δ`. With `tol = 0` comparisons are exact in `S`.
pub fn verify_relation<S: Scalar>(trace: &ReductionTrace<S>, tol: f64) -> RelationReport {
    let le = |a: &S, b: &S| -> bool {
        if tol == 0.0 {
            a <= b
        } else {
            a.clone() <= b.clone() + S::from_f64(tol * (1.0 + b.to_f64().abs()))
        }
    };
    let mut rep = RelationReport {
        steps: trace.steps.len(),
        requests: trace.requests.len(),
        ..Default::default()
    };
    let note = |rep: &mut RelationReport, k: usize, what: String| {
        if rep.first_violation.is_none() {
            rep.first_violation = Some((k, what));
        }
    };
    for (k, s) in trace.steps.iter().enumerate() {
        if let Some(i) = (0..s.w_s.len()).find(|&i| !le(&s.w_s[i], &s.w_t[i])) {
            rep.domination_violations += 1;
            note(&mut rep, k, format!("w_S({i}) > w_T({i})"));
        }
        let rhs = s.mcost.clone() + s.w_t[s.hole].clone();
        if !le(&s.lcost, &rhs) {
            rep.ledger_violations += 1;
            note(&mut rep, k, format!("lcost {:?} > mcost + w_T(i_c) = {:?}", s.lcost, rhs));
        }
    }
    let bound = S::from_u64(2) * trace.cost_s() + trace.opt_t() + S::from_f64(trace.diameter);
    rep.final_ok = le(&trace.cost_t(), &bound);
    if !rep.final_ok {
        let k = trace.steps.len();
        note(&mut rep, k, "cost_T > 2 cost_S + opt_T + diameter".into());
    }
    rep.cost_t = trace.cost_t().to_f64();
    rep.cost_s = trace.cost_s().to_f64();
    rep.opt_t = trace.opt_t().to_f64();
    rep.opt_s = trace.opt_s().to_f64();
    rep
}

impl<S: Scalar> ReductionTrace<S> {
    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "task": s.task,
                    "request": s.request,
                    "hole": s.hole,
                    "lcost": s.lcost.to_f64(),
                    "mcost": s.mcost.to_f64(),
                    "w_s": s.w_s.iter().map(Scalar::to_f64).collect::<Vec<_>>(),
                    "w_t": s.w_t.iter().map(Scalar::to_f64).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "algorithm": self.algorithm,
            "start": self.start,
            "requests": self.requests,
            "cost_t": self.cost_t().to_f64(),
            "cost_s": self.cost_s().to_f64(),
            "opt_t": self.opt_t().to_f64(),
            "steps": steps,
        })
    }
}
