use super::shell::shell_extract;
use super::Extraction;
use crate::error::{param, Result};
use crate::hst::HstTree;
use crate::metric::MetricSpace;

/// Smallest `h ≥ 1` with `ℓ^h ≥ k`.
pub fn sparse_h(k: f64, ell: f64) -> usize {
    let mut h = 1usize;
    let mut p = ell;
    while p < k * (1.0 - 1e-12) {
        p *= ell;
        h += 1;
    }
    h
}

/// Maximum-leaf `h`-sparse subtree (branching vertices pairwise at least `h` edges apart).
/// Degenerate vertices are kept; the result contains the root.
pub fn sparse_subtree(t: &HstTree, h: usize) -> Result<HstTree> {
    if h == 0 {
        return param("h must be at least 1");
    }
    let n = t.nodes().len();
    let order = t.preorder();
    // g[u*h + i]
    let mut g = vec![0u64; n * h];
    for &u in order.iter().rev() {
        let kids = t.children(u);
        if kids.is_empty() {
            for i in 0..h {
                g[u * h + i] = 1;
            }
            continue;
        }
        for i in 1..h {
            g[u * h + i] = kids.iter().map(|&c| g[c * h + i - 1]).max().unwrap_or(0);
        }
        let branch: u64 = kids.iter().map(|&c| g[c * h + h - 1]).sum();
        let single = kids.iter().map(|&c| g[c * h]).max().unwrap_or(0);
        g[u * h] = branch.max(single);
    }
    let mut keep = vec![false; n];
    let mut stack = vec![(t.root(), 0usize)];
    while let Some((u, i)) = stack.pop() {
        keep[u] = true;
        let kids = t.children(u);
        if kids.is_empty() {
            continue;
        }
        let argmax = |state: usize| {
            let mut best = kids[0];
            for &c in kids {
                if g[c * h + state] > g[best * h + state] {
                    best = c;
                }
            }
            best
        };
        if i > 0 {
            stack.push((argmax(i - 1), i - 1));
        } else {
            let branch: u64 = kids.iter().map(|&c| g[c * h + h - 1]).sum();
            let single = argmax(0);
            if branch >= g[single * h] {
                for &c in kids {
                    stack.push((c, h - 1));
                }
            } else {
                stack.push((single, 0));
            }
        }
    }
    Ok(t.keep_nodes(&keep))
}

/// Every branching vertex is at least `h` edges below its nearest branching ancestor.
pub fn is_h_sparse(t: &HstTree, h: usize) -> bool {
    let mut stack = vec![(t.root(), usize::MAX)];
    while let Some((u, dist)) = stack.pop() {
        let branching = t.children(u).len() >= 2;
        if branching && dist < h {
            return false;
        }
        let next = if branching { 1 } else { dist.saturating_add(1) };
        for &c in t.children(u) {
            stack.push((c, next));
        }
    }
    true
}

/// Exhaustive maximum over leaf subsets of the induced subtree's `h`-sparse size (≤ 20 leaves).
pub fn max_sparse_leaves_bruteforce(t: &HstTree, h: usize) -> usize {
    let ids = t.leaf_ids();
    let n = ids.len();
    assert!(n <= 20, "brute force limited to 20 leaves");
    let mut best = 0;
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let chosen: Vec<&str> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ids[i].as_str()).collect();
        let sub = t.induced(&chosen).expect("leaves exist");
        if is_h_sparse(&sub, h) {
            best = size;
        }
    }
    best
}

/// 1-HST to k-HST: coarsen to an ℓ-HST, keep an `h`-sparse subtree, coalesce degenerate vertices.
pub fn prune_to_khst(t: &HstTree, k: f64, ell: f64) -> Result<Extraction> {
    if !(k > 1.0) {
        return param(format!("k must exceed 1, got {k}"));
    }
    if !(ell > 1.0 && ell <= k) {
        return param(format!("ell must lie in (1, k], got {ell}"));
    }
    t.validate()?;
    let h = sparse_h(k, ell);
    let n = t.leaf_count();
    let coarse = t.to_ell_hst(ell)?;
    let sparse = sparse_subtree(&coarse, h)?;
    let out = sparse.remove_degenerate();
    let mut ex = Extraction::measured_above(&t.to_metric()?, out, (n as f64).powf(1.0 / h as f64), ell)?;
    ex.h = Some(h);
    Ok(ex)
}

/// Shell extraction followed by pruning: `|S| ≥ n^{1/(βh)}` and factor `≤ ℓ(2t+1)`.
pub fn ramsey_extract(m: &MetricSpace, beta: f64, k: f64, ell: f64) -> Result<Extraction> {
    let shell = shell_extract(m, beta)?;
    let pruned = prune_to_khst(&shell.tree, k, ell)?;
    let h = pruned.h.unwrap_or(1);
    let t = shell.t;
    let n = m.len() as f64;
    // Pruned labels sit above the shell tree by at most ℓ; scale them back under the metric.
    let mut ex = Extraction::measured(
        m,
        pruned.tree.scale_labels(1.0 / ell)?,
        n.powf(1.0 / (beta * h as f64)),
        ell * shell.guaranteed_factor,
    )?;
    ex.t = t;
    ex.h = Some(h);
    Ok(ex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::uniform;

    #[test]
    fn sparse_examples() {
        let leaf = HstTree::leaf("a");
        assert_eq!(sparse_subtree(&leaf, 3).unwrap(), leaf);
        let cb = HstTree::complete(2, 2, 1.0, 0.5);
        let s = sparse_subtree(&cb, 2).unwrap();
        assert_eq!(s.leaf_count(), 2);
        assert!(is_h_sparse(&s, 2));
        assert_eq!(max_sparse_leaves_bruteforce(&cb, 2), 2);
        let star = HstTree::star(5, 1.0);
        assert_eq!(sparse_subtree(&star, 2).unwrap().leaf_count(), 5);
        assert_eq!(max_sparse_leaves_bruteforce(&star, 2), 5);
    }

    #[test]
    fn h_formula() {
        assert_eq!(sparse_h(4.0, 2.0), 2);
        assert_eq!(sparse_h(4.0, 4.0), 1);
        assert_eq!(sparse_h(9.0, 2.0), 4);
        assert_eq!(sparse_h(1.5, 2.0), 1);
    }

    #[test]
    fn prune_examples() {
        let t = HstTree::node(16.0, vec![HstTree::leaf("x"), HstTree::node(1.0, vec![HstTree::leaf("a"), HstTree::leaf("b")])]);
        let ex = prune_to_khst(&t, 4.0, 4.0).unwrap();
        assert_eq!(ex.tree, t);
        assert_eq!(ex.measured_factor, 1.0);
        // With ℓ < k the sparseness requirement counts edges, not label ratios.
        let ex = prune_to_khst(&t, 4.0, 2.0).unwrap();
        assert_eq!(ex.subset.len(), 2);
        let cb = HstTree::complete(2, 4, 1.0, 0.5);
        let ex = prune_to_khst(&cb, 4.0, 2.0).unwrap();
        assert!(ex.subset.len() >= 4);
        assert!(ex.tree.is_khst(4.0));
        assert!(ex.meets_guarantees(1e-12));
        let two = HstTree::star(2, 1.0);
        assert_eq!(prune_to_khst(&two, 4.0, 2.0).unwrap().tree, two);
        assert!(prune_to_khst(&two, 4.0, 5.0).is_err());
    }

    #[test]
    fn ramsey_examples() {
        let ex = ramsey_extract(&uniform(1, 1.0).unwrap(), 2.0, 4.0, 2.0).unwrap();
        assert_eq!(ex.subset.len(), 1);
        let ex = ramsey_extract(&uniform(16, 1.0).unwrap(), 2.0, 4.0, 2.0).unwrap();
        assert!(ex.subset.len() >= 2);
        assert!(ex.meets_guarantees(1e-9));
        assert!(ex.tree.is_khst(4.0));
    }
}
