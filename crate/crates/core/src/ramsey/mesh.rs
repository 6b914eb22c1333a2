use super::code::gv_code;
use super::Extraction;
use crate::error::{Error, Result};
use crate::hst::HstTree;
use crate::metric::{coord_id, mesh_size, MetricSpace, Norm};
use serde::Serialize;

/// Pairwise label check of a mesh HST: `Δ(lca) ≤ d ≤ 12·Δ(lca)` for every leaf pair.
#[derive(Clone, Debug, Serialize)]
pub struct MeshCheck {
    pub pairs: usize,
    pub violations: usize,
    pub khst9: bool,
    /// Smallest `d/Δ(lca)` and largest `d/Δ(lca)` seen.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub first_violation: Option<(String, String)>,
}

impl MeshCheck {
    pub fn ok(&self) -> bool {
        self.violations == 0 && self.khst9
    }
}

/// Corner sub-mesh selection on `[s]^h`: a 9-HST that the chosen points 12-approximate.
pub fn mesh_extract(s: usize, h: usize, norm: Norm, budget: usize) -> Result<Extraction> {
    if s == 0 || h == 0 {
        return crate::error::param("mesh needs s >= 1 and h >= 1");
    }
    let n = mesh_size(s, h, budget)?;
    let code = gv_code(h, 1.0 / 3.0)?;
    let corners: Vec<Vec<usize>> = code.words.iter().map(|&w| code.bits(w)).collect();
    let tree = build(&vec![0; h], s, &corners, norm);
    let ids = tree.leaf_ids();
    let coords: Vec<Vec<u32>> = ids.iter().map(|id| parse_coords(id)).collect::<Result<_>>()?;
    let m = MetricSpace::from_fn(ids, |i, j| norm.dist(&coords[i], &coords[j]));
    let c = 0.08 * 2f64.ln() / 9f64.ln();
    Extraction::measured(&m, tree, (n as f64).powf(c), 12.0)
}

fn build(origin: &[usize], s: usize, corners: &[Vec<usize>], norm: Norm) -> HstTree {
    if s == 1 {
        return HstTree::leaf(coord_id(origin));
    }
    let sub = s.div_ceil(9);
    let label = norm.ones_norm(origin.len()) * (s - 1) as f64 / 12.0;
    let kids = corners
        .iter()
        .map(|w| {
            let o: Vec<usize> = origin.iter().zip(w).map(|(&x, &a)| x + a * (s - sub)).collect();
            build(&o, sub, corners, norm)
        })
        .collect();
    HstTree::node(label, kids)
}

fn parse_coords(id: &str) -> Result<Vec<u32>> {
    id.split(',')
        .map(|x| x.parse::<u32>().map_err(|_| Error::UnknownPoint(id.into())))
        .collect()
}

/// Checks every leaf pair of a mesh HST (leaf ids are coordinates) against its lca label.
pub fn mesh_check(tree: &HstTree, norm: Norm, tol: f64) -> Result<MeshCheck> {
    let (leaves, lca) = tree.lca_matrix();
    let coords: Vec<Vec<u32>> = leaves
        .iter()
        .map(|&u| parse_coords(tree.node_ref(u).point.as_deref().unwrap_or("")))
        .collect::<Result<_>>()?;
    let n = leaves.len();
    let mut out = MeshCheck {
        pairs: 0,
        violations: 0,
        khst9: tree.is_khst(9.0),
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
        first_violation: None,
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let label = tree.delta(lca[i * n + j]);
            let d = norm.dist(&coords[i], &coords[j]);
            out.pairs += 1;
            out.min_ratio = out.min_ratio.min(d / label);
            out.max_ratio = out.max_ratio.max(d / label);
            if d < label * (1.0 - tol) || d > 12.0 * label * (1.0 + tol) {
                out.violations += 1;
                if out.first_violation.is_none() {
                    out.first_violation = Some((coord_id_u32(&coords[i]), coord_id_u32(&coords[j])));
                }
            }
        }
    }
    Ok(out)
}

fn coord_id_u32(c: &[u32]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{mesh, DEFAULT_POINT_BUDGET};

    #[test]
    fn single_point() {
        let ex = mesh_extract(1, 3, Norm::P(2.0), DEFAULT_POINT_BUDGET).unwrap();
        assert_eq!(ex.subset, vec!["0,0,0".to_string()]);
    }

    #[test]
    fn one_level() {
        let ex = mesh_extract(2, 4, Norm::P(1.0), DEFAULT_POINT_BUDGET).unwrap();
        assert_eq!(ex.subset.len(), 8);
        assert_eq!(ex.tree.height(), 1);
        assert!(ex.meets_guarantees(1e-9));
        assert!(mesh_check(&ex.tree, Norm::P(1.0), 1e-9).unwrap().ok());
    }

    #[test]
    fn two_levels() {
        let ex = mesh_extract(10, 2, Norm::P(2.0), DEFAULT_POINT_BUDGET).unwrap();
        assert_eq!(ex.subset.len(), 16);
        assert_eq!(ex.tree.height(), 2);
        assert!(ex.tree.is_khst(9.0));
        assert!(ex.meets_guarantees(1e-9));
        let chk = mesh_check(&ex.tree, Norm::P(2.0), 1e-9).unwrap();
        assert!(chk.ok(), "{chk:?}");
        // subset points belong to the mesh
        let full = mesh(10, 2, Norm::P(2.0), DEFAULT_POINT_BUDGET).unwrap();
        assert!(full.restrict(&ex.subset).is_ok());
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(mesh_extract(10, 7, Norm::Inf, 1000), Err(Error::Budget(_))));
    }
}
