use super::flexible::{combine, flexible_fair, flexible_uniform_ratios, ChildAdversary, FlexibleAdversary};
use super::uniform::empty_adversary;
use super::{AdversarySpec, Constants};
use crate::error::{param, Error, Result};
use crate::hst::HstTree;
use crate::mts::Umts;
use serde::Serialize;
use serde_json::{json, Value};
use std::sync::Arc;

/// Claimed `(r, β)` at a vertex next to the inductive targets
/// `max{1, c₂(1+ln n)}` and `c₃(1+ln n)`.
#[derive(Clone, Debug, Serialize)]
pub struct VertexClaim {
    pub node: usize,
    pub leaves: usize,
    pub delta: f64,
    pub kind: &'static str,
    pub r: f64,
    pub beta: f64,
    pub target_r: f64,
    pub target_beta: f64,
}

impl VertexClaim {
    pub fn meets_targets(&self) -> bool {
        self.r >= self.target_r && self.beta <= self.target_beta
    }
}

#[derive(Clone, Debug)]
pub struct HstAdversary {
    /// The input with degenerate vertices coalesced; point `i` is its `i`-th leaf.
    pub tree: HstTree,
    pub family: FlexibleAdversary,
    pub vertices: Vec<VertexClaim>,
    /// Smallest label ratio along internal edges (∞ for height ≤ 1).
    pub separation: f64,
    /// `c₁(1 + ln N)²`.
    pub k_required: f64,
    pub warnings: Vec<String>,
}

impl HstAdversary {
    /// Member with the smallest `β′`.
    pub fn member(&self) -> Result<AdversarySpec> {
        self.family.base_member()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family.to_json(),
            "vertices": self.vertices,
            "separation": self.separation,
            "k_required": self.k_required,
            "warnings": self.warnings,
        })
    }
}

/// Bottom-up adversary on the leaves of an HST. Vertices whose children are all leaves get
/// the flexible fair adversary; others combine their children through [`flexible_uniform_ratios`].
/// With `strict`, a separation below `c₁(1+ln N)²` is an error instead of a warning.
pub fn hst_adversary(tree: &HstTree, c: &Constants, strict: bool) -> Result<HstAdversary> {
    tree.validate()?;
    c.validate()?;
    let t = tree.remove_degenerate();
    let metric = t.to_metric()?;
    let n = metric.len();
    let k_required = c.c1 * (1.0 + (n as f64).ln()).powi(2);
    let mut separation = f64::INFINITY;
    for u in t.preorder() {
        for &ch in t.children(u) {
            if !t.is_leaf(ch) {
                separation = separation.min(t.delta(u) / t.delta(ch));
            }
        }
    }
    let mut warnings = Vec::new();
    if separation < k_required {
        let msg = format!("separation {separation} is below c1(1+ln N)^2 = {k_required}");
        if strict {
            return param(msg);
        }
        warnings.push(msg);
    }
    let umts = Umts::fair(metric.clone());
    if n == 1 {
        let empty = empty_adversary(umts.clone());
        let family = FlexibleAdversary::constant(empty);
        return Ok(HstAdversary {
            tree: t,
            family,
            vertices: vec![],
            separation,
            k_required,
            warnings,
        });
    }
    let mut index = vec![usize::MAX; t.nodes().len()];
    for (i, &u) in t.leaves().iter().enumerate() {
        index[u] = i;
    }
    let mut vertices = Vec::new();
    let root = build(&t, t.root(), &index, &metric, c, &mut vertices)?;
    let ChildAdversary::Sub { family, .. } = root else {
        return Err(Error::Invariant("root of a multi-leaf tree is a leaf".into()));
    };
    Ok(HstAdversary {
        tree: t,
        family,
        vertices,
        separation,
        k_required,
        warnings,
    })
}

fn build(
    t: &HstTree,
    u: usize,
    index: &[usize],
    metric: &crate::metric::MetricSpace,
    c: &Constants,
    out: &mut Vec<VertexClaim>,
) -> Result<ChildAdversary> {
    if t.is_leaf(u) {
        return Ok(ChildAdversary::Leaf(index[u]));
    }
    let mut kids = t
        .children(u)
        .iter()
        .map(|&ch| build(t, ch, index, metric, c, out))
        .collect::<Result<Vec<_>>>()?;
    let delta = t.delta(u);
    let family = if kids.iter().all(|k| matches!(k, ChildAdversary::Leaf(_))) {
        flexible_fair(kids.len(), delta)?
    } else {
        kids.sort_by(|a, b| b.r().total_cmp(&a.r()));
        let ratios: Vec<f64> = kids.iter().map(ChildAdversary::r).collect();
        let comb = flexible_uniform_ratios(delta, &ratios, c)?;
        let points = points_of(&kids);
        let local = |g: usize| points.iter().position(|&p| p == g).expect("own point");
        let local_kids = kids
            .iter()
            .map(|k| match k {
                ChildAdversary::Leaf(p) => ChildAdversary::Leaf(local(*p)),
                ChildAdversary::Sub { points, delta, family } => ChildAdversary::Sub {
                    points: points.iter().map(|&p| local(p)).collect(),
                    delta: *delta,
                    family: family.clone(),
                },
            })
            .collect();
        let umts = Umts::fair(metric.restrict_indices(&points));
        combine(umts, delta, local_kids, comb)?
    };
    let points = points_of(&kids);
    let nl = points.len() as f64;
    out.push(VertexClaim {
        node: u,
        leaves: points.len(),
        delta,
        kind: family.kind,
        r: family.r,
        beta: family.beta,
        target_r: (c.c2 * (1.0 + nl.ln())).max(1.0),
        target_beta: c.c3 * (1.0 + nl.ln()),
    });
    Ok(ChildAdversary::Sub { points, delta, family })
}

fn points_of(kids: &[ChildAdversary]) -> Vec<usize> {
    let mut pts = Vec::new();
    for k in kids {
        match k {
            ChildAdversary::Leaf(p) => pts.push(*p),
            ChildAdversary::Sub { points, .. } => pts.extend_from_slice(points),
        }
    }
    pts
}

impl FlexibleAdversary {
    /// Every `β′` maps to the same adversary.
    pub(crate) fn constant(spec: AdversarySpec) -> FlexibleAdversary {
        let s = Arc::new(spec);
        let s2 = s.clone();
        FlexibleAdversary::from_parts(
            s.kind,
            s.umts.clone(),
            s.delta,
            s.r,
            s.beta,
            1.0,
            Arc::new(move |_| Ok((*s2).clone())),
        )
    }
}
