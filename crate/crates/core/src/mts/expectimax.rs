use super::{Task, Umts};
use crate::error::{param, Error, Result};
use crate::scalar::Scalar;

/// Explicit finite distribution over task sequences.
pub type Distribution<S> = Vec<(S, Vec<Task>)>;

pub const MAX_EXPECTIMAX_STATES: usize = 1_000_000;

struct TrieNode<S> {
    mass: S,
    children: Vec<(Task, usize)>,
}

/// Smallest expected cost of a deterministic online algorithm that knows the distribution.
/// Lower-bounds every randomized online algorithm on it.
pub fn expectimax_online_opt<S: Scalar>(dist: &Distribution<S>, u: &Umts, u0: usize) -> Result<S> {
    let b = u.len();
    if u0 >= b {
        return Err(Error::UnknownPoint(format!("start point {u0}")));
    }
    let mut total = S::zero();
    for (p, seq) in dist {
        if *p < S::zero() {
            return param("probabilities must be nonnegative");
        }
        u.check_tasks(seq)?;
        total = total + p.clone();
    }
    let mut nodes: Vec<TrieNode<S>> = vec![TrieNode {
        mass: total,
        children: vec![],
    }];
    for (p, seq) in dist {
        let mut at = 0;
        for t in seq {
            let found = nodes[at]
                .children
                .iter()
                .find(|(c, _)| c.point == t.point && c.cost.to_bits() == t.cost.to_bits())
                .map(|&(_, i)| i);
            at = match found {
                Some(i) => {
                    nodes[i].mass = nodes[i].mass.clone() + p.clone();
                    i
                }
                None => {
                    nodes.push(TrieNode {
                        mass: p.clone(),
                        children: vec![],
                    });
                    let i = nodes.len() - 1;
                    nodes[at].children.push((*t, i));
                    i
                }
            };
            if nodes.len().saturating_mul(b) > MAX_EXPECTIMAX_STATES {
                return Err(Error::Budget(format!(
                    "expectimax needs more than {MAX_EXPECTIMAX_STATES} states"
                )));
            }
        }
    }
    let dist_s: Vec<Vec<S>> = (0..b)
        .map(|i| (0..b).map(|j| S::from_f64(u.distance_ratio * u.metric.d(i, j))).collect())
        .collect();
    let ratio: Vec<S> = u.cost_ratios.iter().map(|&r| S::from_f64(r)).collect();
    // value[node][cur]: mass-weighted cost still to come; children have larger indices.
    let mut value: Vec<Vec<S>> = vec![Vec::new(); nodes.len()];
    for at in (0..nodes.len()).rev() {
        let mut row = vec![S::zero(); b];
        for (cur, slot) in row.iter_mut().enumerate() {
            let mut acc = S::zero();
            for &(t, child) in &nodes[at].children {
                let m = nodes[child].mass.clone();
                let mut best: Option<S> = None;
                for next in 0..b {
                    let mut step = dist_s[cur][next].clone();
                    if t.point == next {
                        step = step + ratio[next].clone() * S::from_f64(t.cost);
                    }
                    let v = m.clone() * step + value[child][next].clone();
                    if best.as_ref().map_or(true, |bv| v < *bv) {
                        best = Some(v);
                    }
                }
                acc = acc + best.expect("b >= 1");
            }
            *slot = acc;
        }
        value[at] = row;
    }
    let root_mass = nodes[0].mass.clone();
    if root_mass <= S::zero() {
        return Ok(S::zero());
    }
    Ok(value[0][u0].clone() / root_mass)
}
