use super::select::{bkrs_select, bkrs_threshold, select_branching_exact, BkrsCase, Branching};
use crate::error::{param, Error, Result};
use crate::hst::{HstTree, Node};
use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialKind {
    Krr,
    Bfm,
    Bkrs,
}

impl FromStr for SpecialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "krr" => Ok(SpecialKind::Krr),
            "bfm" => Ok(SpecialKind::Bfm),
            "bkrs" => Ok(SpecialKind::Bkrs),
            other => Err(Error::UnknownName {
                kind: "subclass",
                name: other.into(),
                known: "krr, bfm, bkrs".into(),
            }),
        }
    }
}

pub(crate) fn ceil_sqrt(n: u64) -> u64 {
    let s = n.sqrt();
    if s * s < n {
        s + 1
    } else {
        s
    }
}

/// Children of `u` ordered by subtree size, largest first (ties by position).
fn sorted_children(t: &HstTree, u: usize, sizes: &[usize]) -> Vec<usize> {
    let mut kids = t.children(u).to_vec();
    kids.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]));
    kids
}

fn first_leaf(t: &HstTree, mut u: usize) -> usize {
    while !t.is_leaf(u) {
        u = t.children(u)[0];
    }
    u
}

fn ids(t: &HstTree, leaves: &[usize]) -> Vec<String> {
    leaves
        .iter()
        .map(|&u| t.node_ref(u).point.clone().unwrap_or_default())
        .collect()
}

/// Subtree with exactly `m` leaves in which every vertex is balanced or has at most two children.
pub fn binary_balanced_extract(t: &HstTree, m: usize) -> Result<HstTree> {
    t.validate()?;
    let n = t.leaf_count() as u64;
    let cap = ceil_sqrt(n);
    if m == 0 || m as u64 > cap {
        return param(format!("m must lie in 1..={cap} for {n} leaves, got {m}"));
    }
    let sizes = t.subtree_sizes();
    let mut chosen = Vec::new();
    bb_rec(t, t.root(), m, &sizes, &mut chosen)?;
    Ok(t.induced(&ids(t, &chosen))?.remove_degenerate())
}

fn bb_rec(t: &HstTree, u: usize, m: usize, sizes: &[usize], out: &mut Vec<usize>) -> Result<()> {
    if m == 0 {
        return Ok(());
    }
    if t.is_leaf(u) {
        out.push(u);
        return Ok(());
    }
    let kids = sorted_children(t, u, sizes);
    if kids.len() == 1 {
        return bb_rec(t, kids[0], m, sizes, out);
    }
    let ns: Vec<BigRational> = kids
        .iter()
        .map(|&c| BigRational::from_integer(BigInt::from(sizes[c])))
        .collect();
    match select_branching_exact(&ns)? {
        Branching::Binary => {
            let m1 = m.min(ceil_sqrt(sizes[kids[0]] as u64) as usize);
            let m2 = m - m1;
            if m2 as u64 > ceil_sqrt(sizes[kids[1]] as u64) {
                return Err(Error::Invariant(format!("binary split {m1}+{m2} exceeds child capacity")));
            }
            bb_rec(t, kids[0], m1, sizes, out)?;
            bb_rec(t, kids[1], m2, sizes, out)
        }
        Branching::Equal(l) => {
            let (q, rem) = (m / l, m % l);
            for (i, &c) in kids.iter().take(l).enumerate() {
                let mi = q + usize::from(i < rem);
                if mi as u64 > ceil_sqrt(sizes[c] as u64) {
                    return Err(Error::Invariant(format!("share {mi} exceeds child capacity")));
                }
                bb_rec(t, c, mi, sizes, out)?;
            }
            Ok(())
        }
    }
}

/// Subtree of the requested subclass; `m` is the target size for `Bkrs`.
pub fn special_extract(t: &HstTree, kind: SpecialKind, m: Option<usize>) -> Result<HstTree> {
    t.validate()?;
    match kind {
        SpecialKind::Krr => krr(t),
        SpecialKind::Bfm => bfm(t),
        SpecialKind::Bkrs => {
            let n = t.leaf_count() as u64;
            let cap = bkrs_threshold(n).ceil() as usize;
            let m = m.unwrap_or(bkrs_threshold(n).floor() as usize).max(1);
            if m > cap {
                return param(format!("m must lie in 1..={cap} for {n} leaves, got {m}"));
            }
            let sizes = t.subtree_sizes();
            let mut chosen = Vec::new();
            bkrs_rec(t, t.root(), m, &sizes, &mut chosen)?;
            Ok(t.induced(&ids(t, &chosen))?.remove_degenerate())
        }
    }
}

fn krr(t: &HstTree) -> Result<HstTree> {
    let r = t.remove_degenerate();
    let n = r.leaf_count();
    if n <= 2 {
        return Ok(r);
    }
    let lg = (n as f64).log2();
    let wide = r
        .preorder()
        .into_iter()
        .filter(|&u| !r.is_leaf(u))
        .max_by_key(|&u| (r.children(u).len(), std::cmp::Reverse(u)))
        .expect("internal vertex");
    let chosen: Vec<usize> = if r.children(wide).len() as f64 >= lg {
        r.children(wide).iter().map(|&c| first_leaf(&r, c)).collect()
    } else {
        spine_with_leaves(&r)
    };
    Ok(r.induced(&ids(&r, &chosen))?.remove_degenerate())
}

/// Leaves of a longest root-to-leaf path plus one leaf off each path vertex.
fn spine_with_leaves(t: &HstTree) -> Vec<usize> {
    let mut depth = vec![0usize; t.nodes().len()];
    for &u in t.preorder().iter().rev() {
        depth[u] = t.children(u).iter().map(|&c| depth[c] + 1).max().unwrap_or(0);
    }
    let mut out = Vec::new();
    let mut u = t.root();
    while !t.is_leaf(u) {
        let kids = t.children(u);
        let next = *kids.iter().max_by_key(|&&c| (depth[c], std::cmp::Reverse(c))).expect("kids");
        if let Some(&other) = kids.iter().find(|&&c| c != next) {
            out.push(first_leaf(t, other));
        }
        u = next;
    }
    out.push(u);
    out
}

/// Splits every vertex with more than two children into a chain of binary vertices with the same label.
pub(crate) fn binarize(t: &HstTree) -> HstTree {
    fn go(t: &HstTree, u: usize, out: &mut Vec<Node>) -> usize {
        let n = t.node_ref(u);
        let kids: Vec<usize> = n.children.iter().map(|&c| go(t, c, out)).collect();
        if kids.len() <= 2 {
            out.push(Node {
                delta: n.delta,
                children: kids,
                point: n.point.clone(),
            });
            return out.len() - 1;
        }
        let mut acc = kids[kids.len() - 1];
        for &c in kids[..kids.len() - 1].iter().rev() {
            out.push(Node {
                delta: n.delta,
                children: vec![c, acc],
                point: None,
            });
            acc = out.len() - 1;
        }
        acc
    }
    let mut nodes = Vec::new();
    let root = go(t, t.root(), &mut nodes);
    HstTree::from_arena(nodes, root).expect("binarized tree is valid")
}

fn bfm(t: &HstTree) -> Result<HstTree> {
    let b = binarize(&t.remove_degenerate());
    let chosen = spine_with_leaves(&b);
    Ok(b.induced(&ids(&b, &chosen))?.remove_degenerate())
}

fn bkrs_rec(t: &HstTree, u: usize, m: usize, sizes: &[usize], out: &mut Vec<usize>) -> Result<()> {
    if m == 0 {
        return Ok(());
    }
    if m == 1 || t.is_leaf(u) {
        out.push(first_leaf(t, u));
        return Ok(());
    }
    let kids = sorted_children(t, u, sizes);
    if kids.len() == 1 {
        return bkrs_rec(t, kids[0], m, sizes, out);
    }
    let ns: Vec<u64> = kids.iter().map(|&c| sizes[c] as u64).collect();
    let cap = |c: usize| bkrs_threshold(sizes[c] as u64).ceil() as usize;
    match bkrs_select(&ns)? {
        BkrsCase::Wide => {
            if m > kids.len() {
                return Err(Error::Invariant(format!("wide case needs {m} children")));
            }
            out.extend(kids.iter().take(m).map(|&c| first_leaf(t, c)));
            Ok(())
        }
        BkrsCase::Heavy2 => {
            let (a, b) = (m.div_ceil(2), m / 2);
            if a > cap(kids[0]) || b > cap(kids[1]) {
                return Err(Error::Invariant("balanced split exceeds child capacity".into()));
            }
            bkrs_rec(t, kids[0], a, sizes, out)?;
            bkrs_rec(t, kids[1], b, sizes, out)
        }
        BkrsCase::Heavy1 => {
            if m - 1 > cap(kids[0]) {
                return Err(Error::Invariant("heavy child lacks capacity".into()));
            }
            bkrs_rec(t, kids[0], m - 1, sizes, out)?;
            out.push(first_leaf(t, kids[1]));
            Ok(())
        }
    }
}
