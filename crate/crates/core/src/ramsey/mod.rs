//! Subspace extraction: metrics and trees to (approximate) k-HST subspaces.

mod code;
mod mesh;
mod select;
mod shell;
mod sparse;
mod special;
mod tight;

pub use code::{binary_entropy, gv_code, BinaryCode, MAX_CODE_BITS};
pub use mesh::{mesh_check, mesh_extract, MeshCheck};
pub use select::{
    bkrs_select, bkrs_threshold, select_branching, select_branching_exact, select_branching_log,
    BkrsCase, Branching,
};
pub use shell::{shell_extract, shell_t};
pub use sparse::{
    is_h_sparse, max_sparse_leaves_bruteforce, prune_to_khst, ramsey_extract, sparse_h,
    sparse_subtree,
};
pub use special::{binary_balanced_extract, special_extract, SpecialKind};
pub use tight::{default_eps, tight_example, TightExample};

use crate::error::Result;
use crate::hst::HstTree;
use crate::metric::MetricSpace;
use serde::Serialize;
use std::str::FromStr;

/// A subspace together with the HST it approximates and its guarantees.
#[derive(Clone, Debug, Serialize)]
pub struct Extraction {
    pub subset: Vec<String>,
    pub tree: HstTree,
    pub guaranteed_size: f64,
    pub guaranteed_factor: f64,
    pub measured_factor: f64,
    /// Subspace distances dominate tree distances everywhere.
    pub dominated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<usize>,
}

impl Extraction {
    pub(crate) fn measured(
        m: &MetricSpace,
        tree: HstTree,
        guaranteed_size: f64,
        guaranteed_factor: f64,
    ) -> Result<Extraction> {
        let subset = tree.leaf_ids();
        let sub = m.restrict(&subset)?;
        let rep = sub.approximation_factor(&tree.to_metric()?)?;
        Ok(Extraction {
            subset,
            tree,
            guaranteed_size,
            guaranteed_factor,
            measured_factor: rep.alpha,
            dominated: rep.dominated,
            t: None,
            h: None,
        })
    }

    /// Like [`Extraction::measured`] but for trees lying above `input` (`d_tree ≥ d_input`).
    pub(crate) fn measured_above(
        input: &MetricSpace,
        tree: HstTree,
        guaranteed_size: f64,
        guaranteed_factor: f64,
    ) -> Result<Extraction> {
        let subset = tree.leaf_ids();
        let sub = input.restrict(&subset)?;
        let rep = tree.to_metric()?.approximation_factor(&sub)?;
        Ok(Extraction {
            subset,
            tree,
            guaranteed_size,
            guaranteed_factor,
            measured_factor: rep.alpha,
            dominated: rep.dominated,
            t: None,
            h: None,
        })
    }

    /// Size and factor guarantees hold (with relative slack `tol` on the factor).
    pub fn meets_guarantees(&self, tol: f64) -> bool {
        self.dominated
            && self.subset.len() as f64 >= self.guaranteed_size * (1.0 - 1e-12)
            && self.measured_factor <= self.guaranteed_factor * (1.0 + tol)
    }
}

/// Extraction modes selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtractMode {
    Shell,
    Ramsey,
    Prune,
    BinaryBalanced,
    Krr,
    Bfm,
    Bkrs,
}

impl FromStr for ExtractMode {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "shell" => ExtractMode::Shell,
            "ramsey" => ExtractMode::Ramsey,
            "prune" => ExtractMode::Prune,
            "binary-balanced" => ExtractMode::BinaryBalanced,
            "krr" => ExtractMode::Krr,
            "bfm" => ExtractMode::Bfm,
            "bkrs" => ExtractMode::Bkrs,
            other => {
                return Err(crate::Error::UnknownName {
                    kind: "extraction mode",
                    name: other.into(),
                    known: "shell, ramsey, prune, binary-balanced, krr, bfm, bkrs".into(),
                })
            }
        })
    }
}
