use super::uniform::{composed_uniform_adversary, fair_on, harmonic, ratios_from_sizes};
use super::{AdversarySpec, CombinedSampler, Constants, Part, ScaledSampler};
use crate::error::{param, Error, Result};
use crate::metric::uniform;
use crate::mts::Umts;
use serde_json::{json, Value};
use std::sync::Arc;

type Builder = Arc<dyn Fn(f64) -> Result<AdversarySpec> + Send + Sync>;

/// A family of `(r, β′)`-adversaries, one for every `β′ ∈ [ηβ, β]`.
#[derive(Clone)]
pub struct FlexibleAdversary {
    pub kind: &'static str,
    pub umts: Umts,
    pub delta: f64,
    pub r: f64,
    pub beta: f64,
    pub eta: f64,
    /// Lower bounds on every member's coefficients; empty when members are not discrete.
    pub alpha: Vec<f64>,
    pub params: Value,
    builder: Builder,
}

impl std::fmt::Debug for FlexibleAdversary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlexibleAdversary")
            .field("kind", &self.kind)
            .field("b", &self.umts.len())
            .field("delta", &self.delta)
            .field("r", &self.r)
            .field("beta", &self.beta)
            .field("eta", &self.eta)
            .finish()
    }
}

impl FlexibleAdversary {
    pub(crate) fn from_parts(
        kind: &'static str,
        umts: Umts,
        delta: f64,
        r: f64,
        beta: f64,
        eta: f64,
        builder: Builder,
    ) -> FlexibleAdversary {
        FlexibleAdversary {
            kind,
            umts,
            delta,
            r,
            beta,
            eta,
            alpha: Vec::new(),
            params: json!({}),
            builder,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.eta * self.beta, self.beta)
    }

    pub fn member(&self, beta_prime: f64) -> Result<AdversarySpec> {
        let (lo, hi) = self.range();
        let slack = 1e-12 * hi.abs().max(1.0);
        if !(beta_prime >= lo - slack && beta_prime <= hi + slack) {
            return param(format!("requested beta' = {beta_prime} outside [{lo}, {hi}]"));
        }
        (self.builder)(beta_prime.clamp(lo, hi))
    }

    /// The member with the smallest `β′`.
    pub fn base_member(&self) -> Result<AdversarySpec> {
        self.member(self.eta * self.beta)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "type": self.kind,
            "b": self.umts.len(),
            "delta": self.delta,
            "r": self.r,
            "beta": self.beta,
            "eta": self.eta,
            "alpha": self.alpha,
            "params": self.params,
        })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return param(format!("eta must lie in (0, 1], got {eta}"));
    }
    Ok(())
}

/// Turns an `(r_D, β_D; α)` adversary for `(M; r/η)` into an `(η·r_D, β_D/η; η; α)`
/// family for `(M; r)`: the member for `β′` scales every task by `β′/β_D`.
pub fn flexify(d: AdversarySpec, eta: f64) -> Result<FlexibleAdversary> {
    check_eta(eta)?;
    if !(d.beta > 0.0) {
        return param("flexify needs beta > 0");
    }
    let mut target = d.umts.clone();
    target.cost_ratios.iter_mut().for_each(|r| *r *= eta);
    let r = eta * d.r;
    let beta = d.beta / eta;
    let (delta, alpha, params) = (d.delta, d.alpha.clone(), d.params.clone());
    let base = Arc::new(d);
    let umts = target.clone();
    let builder: Builder = Arc::new(move |bp: f64| {
        let gamma = bp / base.beta;
        let mut s = AdversarySpec::new(
            base.kind,
            umts.clone(),
            base.delta,
            r,
            bp,
            Arc::new(ScaledSampler { inner: base.sampler(), gamma }),
        );
        s.alpha = base.alpha.iter().map(|a| a * gamma).collect();
        s.eta = eta;
        s.params = json!({"gamma": gamma, "base": base.params});
        Ok(s)
    });
    Ok(FlexibleAdversary {
        kind: "flexified",
        umts: target,
        delta,
        r,
        beta,
        eta,
        alpha,
        params,
        builder,
    })
}

/// Fair adversary with tasks scaled by `β′/2`: `(H_b/4, 4; ½; 1,…,1)` on the uniform space;
/// each member honestly claims `r = H_b/β′`.
pub fn flexible_fair(b: usize, delta: f64) -> Result<FlexibleAdversary> {
    if b < 2 {
        return param(format!("fair adversary needs b >= 2, got {b}"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return param(format!("diameter must be positive, got {delta}"));
    }
    let umts = Umts::fair(uniform(b, delta)?);
    let u = umts.clone();
    let builder: Builder = Arc::new(move |bp: f64| {
        let mut s = fair_on(u.clone(), delta, bp / 2.0);
        s.eta = 0.5;
        Ok(s)
    });
    Ok(FlexibleAdversary {
        kind: "fair",
        umts,
        delta,
        r: harmonic(b) / 4.0,
        beta: 4.0,
        eta: 0.5,
        alpha: vec![1.0; b],
        params: json!({}),
        builder,
    })
}

/// Cost-ratio form of [`flexible_uniform`]: the composed adversary on `r/η`, flexified with `η = ½`.
pub fn flexible_uniform_ratios(delta: f64, ratios: &[f64], c: &Constants) -> Result<FlexibleAdversary> {
    let eta = 0.5;
    let rbar: Vec<f64> = ratios.iter().map(|r| r / eta).collect();
    let d = composed_uniform_adversary(delta, &rbar, c)?;
    let formula = d.params["formula_r"].as_f64().unwrap_or(f64::NAN) * eta;
    let mut f = flexify(d, eta)?;
    f.kind = "flexible-uniform";
    f.params["formula_r"] = json!(formula);
    Ok(f)
}

/// Flexible discrete adversary on the uniform space with `r_i = ½ρ(1 + ln n_i)`.
pub fn flexible_uniform(delta: f64, sizes: &[f64], c: &Constants) -> Result<FlexibleAdversary> {
    let ratios = ratios_from_sizes(sizes, 0.5 * c.rho)?;
    flexible_uniform_ratios(delta, &ratios, c)
}

/// Subspace hanging below a vertex: a single point, or a subtree with its own family.
#[derive(Clone, Debug)]
pub enum ChildAdversary {
    Leaf(usize),
    Sub {
        points: Vec<usize>,
        delta: f64,
        family: FlexibleAdversary,
    },
}

impl ChildAdversary {
    /// A single point forces the online algorithm to pay every task: ratio 1.
    pub fn r(&self) -> f64 {
        match self {
            ChildAdversary::Leaf(_) => 1.0,
            ChildAdversary::Sub { family, .. } => family.r,
        }
    }
}

/// `t = ⌈α′Δ/(β_jΔ_j)⌉` blocks and `β′_j = α′Δ/(tΔ_j) ∈ (ηβ_j, β_j]`.
pub fn child_blocks(alpha_prime: f64, delta: f64, beta_j: f64, delta_j: f64, eta: f64) -> Result<(usize, f64)> {
    if !(alpha_prime > 0.0 && delta > 0.0 && beta_j > 0.0 && delta_j > 0.0) {
        return param("child_blocks needs positive inputs");
    }
    let x = alpha_prime * delta / (beta_j * delta_j);
    let t = (x * (1.0 - 1e-12)).ceil().max(1.0);
    let bp = (alpha_prime * delta / (t * delta_j)).min(beta_j);
    if !(bp > eta * beta_j) {
        return Err(Error::Invariant(format!(
            "no integral block count: t = {t} gives beta'_j = {bp} <= eta*beta_j = {}",
            eta * beta_j
        )));
    }
    Ok((t as usize, bp))
}

/// Combining step: each task `(z_j, α′_jΔ)` of a `comb` member becomes `t_j` independent
/// samples of child `j`'s member at `β′_j`. Children are listed in `comb`'s point order.
pub fn combine(
    umts: Umts,
    delta: f64,
    children: Vec<ChildAdversary>,
    comb: FlexibleAdversary,
) -> Result<FlexibleAdversary> {
    let b = children.len();
    if comb.umts.len() != b {
        return Err(Error::Mismatch(format!("{b} children but a {}-point combining adversary", comb.umts.len())));
    }
    if comb.alpha.len() != b {
        return param("combining adversary must be discrete");
    }
    if (comb.delta - delta).abs() > 1e-12 * delta.abs().max(1.0) {
        return Err(Error::Mismatch(format!("combining diameter {} vs vertex {delta}", comb.delta)));
    }
    let mut seen = vec![false; umts.len()];
    for c in &children {
        let pts: &[usize] = match c {
            ChildAdversary::Leaf(p) => std::slice::from_ref(p),
            ChildAdversary::Sub { points, .. } => points,
        };
        for &p in pts {
            if p >= seen.len() || std::mem::replace(&mut seen[p], true) {
                return param(format!("children do not partition the space (point {p})"));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return param("children do not cover the space");
    }
    let eta = comb.eta;
    let mut worst: f64 = 0.0;
    let mut need_k: f64 = 0.0;
    let mut have_k = f64::INFINITY;
    for (j, c) in children.iter().enumerate() {
        if let ChildAdversary::Sub { delta: dj, family, points } = c {
            if (family.eta - eta).abs() > 1e-12 {
                return param(format!("child {j} has eta {} but the combining family has {eta}", family.eta));
            }
            if family.umts.len() != points.len() {
                return Err(Error::Mismatch(format!("child {j}: family on {} points", family.umts.len())));
            }
            if eta >= 1.0 {
                return param("combining subtrees needs eta < 1");
            }
            let ratio = family.beta / comb.alpha[j];
            worst = worst.max(ratio);
            need_k = need_k.max(eta / (1.0 - eta) * ratio);
            have_k = have_k.min(delta / dj);
        }
    }
    if have_k < need_k * (1.0 - 1e-12) {
        return param(format!(
            "separation {have_k} below (eta/(1-eta))*max_j beta_j/alpha_j = {need_k} (max_j beta_j/alpha_j = {worst})"
        ));
    }
    let child_info: Vec<Value> = children
        .iter()
        .map(|c| match c {
            ChildAdversary::Leaf(p) => json!({"leaf": p}),
            ChildAdversary::Sub { points, delta, family } => {
                json!({"points": points, "delta": delta, "r": family.r, "beta": family.beta})
            }
        })
        .collect();
    let (r, beta) = (comb.r, comb.beta);
    let u = umts.clone();
    let children = Arc::new(children);
    let comb = Arc::new(comb);
    let builder: Builder = Arc::new(move |bp: f64| {
        let top = comb.member(bp)?;
        let mut parts = Vec::with_capacity(children.len());
        let mut ts = Vec::new();
        let mut bps = Vec::new();
        for (j, c) in children.iter().enumerate() {
            match c {
                ChildAdversary::Leaf(p) => {
                    parts.push(Part::Leaf(*p));
                    ts.push(Value::Null);
                    bps.push(Value::Null);
                }
                ChildAdversary::Sub { points, delta: dj, family } => {
                    let (t, bj) = child_blocks(top.alpha[j], delta, family.beta, *dj, eta)?;
                    let m = family.member(bj)?;
                    parts.push(Part::Blocks {
                        map: points.clone(),
                        t,
                        sampler: m.sampler(),
                    });
                    ts.push(json!(t));
                    bps.push(json!(bj));
                }
            }
        }
        let mut s = AdversarySpec::new(
            "combined",
            u.clone(),
            delta,
            top.r,
            bp,
            Arc::new(CombinedSampler { top: top.sampler(), parts }),
        );
        s.eta = eta;
        s.params = json!({"t": ts, "beta_child": bps, "alpha_prime": top.alpha});
        Ok(s)
    });
    Ok(FlexibleAdversary {
        kind: "combined",
        umts,
        delta,
        r,
        beta,
        eta,
        alpha: Vec::new(),
        params: json!({"children": child_info, "k_needed": need_k}),
        builder,
    })
}
