use super::{Experiment, ExperimentConfig, Outcome};
use crate::report::Check;
use ramsey_mts::oracle::{max_khst_subset, MAX_ORACLE_POINTS};
use ramsey_mts::ramsey::tight_example;
use ramsey_mts::Result;
use serde_json::json;

/// Exhaustive largest `k`-HST `ℓ`-approximable subset of small hard instances against their ceiling.
pub struct TightExamples;

impl Experiment for TightExamples {
    fn name(&self) -> &'static str {
        "tight-examples"
    }

    fn summary(&self) -> &'static str {
        "generated hard instances vs exhaustive subset search (params: case, k, ell, eps, h_max)"
    }

    fn execute(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let case = cfg.param("case", 1u8)?;
        let k = cfg.param("k", 4.0f64)?;
        let ell = cfg.param("ell", 2.0f64)?;
        let h_max = cfg.param("h_max", 4usize)?;
        let eps = match cfg.params.get("eps") {
            Some(_) => Some(cfg.param("eps", 0.0f64)?),
            None => None,
        };
        let mut runs = Vec::new();
        let mut bad = Vec::new();
        let mut bad_gap = Vec::new();
        for h in 1..=h_max {
            let ex = match tight_example(case, k, ell, h, eps, MAX_ORACLE_POINTS) {
                Ok(ex) => ex,
                Err(ramsey_mts::Error::Budget(_)) => break,
                Err(e) => return Err(e),
            };
            let m = ex.tree.to_metric()?;
            let best = max_khst_subset(&m, k, ell)?.len();
            let ok = best as f64 <= ex.ceiling * (1.0 + 1e-12);
            if !ok {
                bad.push(h);
            }
            // Branching vertices of a subset that approximates a k-HST sit at least
            // ⌈log_{ℓ′}(k/ℓ)⌉ levels apart, so a binary tree of height H keeps at most
            // 2^{⌊(H−1)/gap⌋+1} leaves.
            let gap = ((k / ell).ln() / ex.ell_prime.ln() - 1e-12).ceil().max(1.0) as usize;
            let height = ex.tree.height();
            let gap_ceiling = if case == 1 { Some(2f64.powi(((height.max(1) - 1) / gap + 1) as i32)) } else { None };
            let gap_ok = gap_ceiling.map_or(true, |c| best as f64 <= c);
            if !gap_ok {
                bad_gap.push(h);
            }
            runs.push(json!({
                "case": case,
                "h": h,
                "n": ex.n,
                "ell_prime": ex.ell_prime,
                "ceiling": ex.ceiling,
                "max_subset": best,
                "ok": ok,
                "level_gap": gap,
                "gap_ceiling": gap_ceiling,
                "gap_ok": gap_ok,
            }));
        }
        let checks = vec![
            Check::new("instances", !runs.is_empty(), format!("{} instances within {MAX_ORACLE_POINTS} points", runs.len())),
            Check::new("subset_ceiling", bad.is_empty(), format!("max subset <= n^(1/log_ell k) + 1; failing h: {bad:?}")),
            Check::new("gap_ceiling", bad_gap.is_empty(), format!("max subset <= 2^(floor((height-1)/gap)+1); failing h: {bad_gap:?}")),
        ];
        Ok(Outcome {
            trials: None,
            aggregate: json!({"case": case, "k": k, "ell": ell, "eps": eps}),
            runs,
            checks,
        })
    }
}
