use super::{Experiment, ExperimentConfig, Outcome};
use crate::report::Check;
use ramsey_mts::adversary::{estimate_ratio, hst_adversary, AdversarySpec, HstAdversary};
use ramsey_mts::metric::transfer_bound;
use ramsey_mts::mts::builtin_algorithms;
use ramsey_mts::ramsey::{mesh_check, mesh_extract};
use ramsey_mts::rng::trial_rng;
use ramsey_mts::{HstTree, Norm, Result};
use serde_json::{json, Value};

const DEFAULT_TRIALS: usize = 2000;

/// Samples `trials` sequences from `member`, checks each, and estimates `E[opt⁰]` and online costs.
pub(crate) fn adversary_outcome(
    adv: &HstAdversary,
    member: &AdversarySpec,
    cfg: &ExperimentConfig,
    max_starts: usize,
) -> Result<(Vec<Value>, Value, Vec<Check>)> {
    let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    let mut bad = 0usize;
    let mut first = None;
    for i in 0..trials {
        let seq = member.sample(&mut trial_rng(cfg.seed, i as u64));
        if let Err(e) = member.check_sample(&seq) {
            bad += 1;
            first.get_or_insert_with(|| format!("trial {i}: {e}"));
        }
    }
    let rep = estimate_ratio(member, &builtin_algorithms(), trials, cfg.seed, max_starts)?;
    let mut runs = vec![json!({
        "quantity": "opt0",
        "u0": rep.best_u0,
        "mean": rep.opt0.mean,
        "lo": rep.opt0.lo,
        "hi": rep.opt0.hi,
        "bound": rep.beta_delta,
        "consistent": rep.opt0_consistent,
        "cleared": rep.opt0_cleared,
    })];
    let mut checks = vec![
        Check::new("samples_well_formed", bad == 0, first.unwrap_or_else(|| format!("{trials} samples"))),
        Check::new(
            "opt0_upper",
            rep.opt0_consistent,
            format!("E[opt0] = {} (99% CI [{}, {}]) vs beta*Delta = {}", rep.opt0.mean, rep.opt0.lo, rep.opt0.hi, rep.beta_delta),
        ),
    ];
    for a in &rep.algorithms {
        runs.push(json!({
            "quantity": a.name,
            "u0": a.worst_u0,
            "mean": a.cost.mean,
            "lo": a.cost.lo,
            "hi": a.cost.hi,
            "bound": rep.r_beta_delta,
            "consistent": a.consistent,
            "cleared": a.cleared,
        }));
        checks.push(Check::new(
            format!("online_lower/{}", a.name),
            a.consistent,
            format!("E[cost] = {} (99% CI [{}, {}]) vs r*beta*Delta = {}", a.cost.mean, a.cost.lo, a.cost.hi, rep.r_beta_delta),
        ));
    }
    let aggregate = json!({
        "points": member.len(),
        "kind": member.kind,
        "r": member.r,
        "beta": member.beta,
        "delta": member.delta,
        "mean_length": rep.mean_length,
        "cleared": rep.cleared(),
        "separation": adv.separation,
        "k_required": adv.k_required,
        "warnings": adv.warnings,
        "vertices": adv.vertices,
    });
    Ok((runs, aggregate, checks))
}

/// Mesh extraction, the HST adversary on the extracted tree, and Monte Carlo estimates.
pub struct MeshLb;

impl Experiment for MeshLb {
    fn name(&self) -> &'static str {
        "mesh-lb"
    }

    fn summary(&self) -> &'static str {
        "mesh_extract -> hst_adversary -> estimate_ratio (params: s, h, norm, max_starts)"
    }

    fn execute(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let s = cfg.param("s", 10usize)?;
        let h = cfg.param("h", 2usize)?;
        let norm = Norm::parse(&cfg.param("norm", "2".to_string())?)?;
        let max_starts = cfg.param("max_starts", 4usize)?;
        let ext = mesh_extract(s, h, norm, cfg.budget_points)?;
        let mc = mesh_check(&ext.tree, norm, cfg.tol)?;
        let adv = hst_adversary(&ext.tree, &cfg.constants, false)?;
        let member = adv.member()?;
        let (runs, mut aggregate, mut checks) = adversary_outcome(&adv, &member, cfg, max_starts)?;
        checks.insert(
            0,
            Check::new(
                "mesh_extraction",
                mc.ok() && ext.meets_guarantees(cfg.tol),
                format!("{} leaves, 9-HST {}, ratios in [{}, {}]", ext.subset.len(), mc.khst9, mc.min_ratio, mc.max_ratio),
            ),
        );
        aggregate["extraction"] = json!({
            "leaves": ext.subset.len(),
            "guaranteed_size": ext.guaranteed_size,
            "measured_factor": ext.measured_factor,
            "transferred_r": transfer_bound(member.r, ext.measured_factor)?,
        });
        Ok(Outcome {
            trials: Some(cfg.trials.unwrap_or(DEFAULT_TRIALS)),
            runs,
            aggregate,
            checks,
        })
    }
}

/// The HST adversary on a given tree (default: complete binary, height 2, ratio 1/64).
pub struct HstLb;

impl Experiment for HstLb {
    fn name(&self) -> &'static str {
        "hst-lb"
    }

    fn summary(&self) -> &'static str {
        "hst_adversary -> estimate_ratio on --tree or a complete tree (params: arity, height, top, ratio, max_starts)"
    }

    fn execute(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let tree = match &cfg.tree {
            Some(t) => t.clone(),
            None => HstTree::complete(
                cfg.param("arity", 2usize)?,
                cfg.param("height", 2usize)?,
                cfg.param("top", 64.0f64)?,
                cfg.param("ratio", 1.0 / 64.0)?,
            ),
        };
        let max_starts = cfg.param("max_starts", 4usize)?;
        let adv = hst_adversary(&tree, &cfg.constants, false)?;
        let member = match cfg.params.get("beta") {
            Some(_) => adv.family.member(cfg.param("beta", 0.0f64)?)?,
            None => adv.member()?,
        };
        let (runs, aggregate, checks) = adversary_outcome(&adv, &member, cfg, max_starts)?;
        Ok(Outcome {
            trials: Some(cfg.trials.unwrap_or(DEFAULT_TRIALS)),
            runs,
            aggregate,
            checks,
        })
    }
}
