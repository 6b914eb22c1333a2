use super::{Experiment, ExperimentConfig, Outcome};
use crate::report::Check;
use ramsey_mts::metric::path;
use ramsey_mts::oracle::{max_ultrametric_subset, MAX_ORACLE_POINTS};
use ramsey_mts::{Error, Result};
use serde_json::json;

/// Largest subset of `n` equally spaced points that an ultrametric `α`-approximates.
pub struct LineImpossibility;

impl Experiment for LineImpossibility {
    fn name(&self) -> &'static str {
        "line-impossibility"
    }

    fn summary(&self) -> &'static str {
        "brute-force maximum alpha-approximable subset of n equally spaced points (params: alphas, n_lo, n_hi)"
    }

    fn execute(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let alphas = cfg.list("alphas", &[1.0f64, 2.0])?;
        let lo = cfg.param("n_lo", 4usize)?;
        let hi = cfg.param("n_hi", 12usize)?;
        if hi > MAX_ORACLE_POINTS || lo < 2 || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= n_lo <= n_hi <= {MAX_ORACLE_POINTS}, got {lo}..{hi}"
            )));
        }
        let mut runs = Vec::new();
        let mut checks = Vec::new();
        for &alpha in &alphas {
            let mut bad = Vec::new();
            for n in lo..=hi {
                let size = max_ultrametric_subset(&path(n, 1.0)?, alpha)?.len();
                let ok = if alpha == 1.0 { size == 2 } else { n < 4 || size < n };
                if !ok {
                    bad.push(n);
                }
                runs.push(json!({"alpha": alpha, "n": n, "max_subset": size, "ok": ok}));
            }
            let claim = if alpha == 1.0 { "size == 2" } else { "size < n" };
            checks.push(Check::new(
                format!("alpha={alpha}"),
                bad.is_empty(),
                format!("{claim} for n in {lo}..={hi}; failing n: {bad:?}"),
            ));
        }
        Ok(Outcome {
            trials: None,
            aggregate: json!({"alphas": alphas, "n_lo": lo, "n_hi": hi}),
            runs,
            checks,
        })
    }
}
