//! Hierarchically well-separated trees.

use crate::error::{param, Error, Result};
use crate::metric::MetricSpace;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Clone, Debug)]
pub struct Node {
    pub delta: f64,
    pub children: Vec<usize>,
    pub point: Option<String>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Rooted labeled tree stored as an arena; leaves carry point ids.
#[derive(Clone, Debug)]
pub struct HstTree {
    nodes: Vec<Node>,
    root: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeJson {
    Leaf { point: String, delta: f64 },
    Internal { delta: f64, children: Vec<NodeJson> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KhstCheck {
    pub ok: bool,
    /// (parent label, child label) of the first offending edge.
    pub witness: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HstClass {
    pub is_khst: bool,
    pub binary_balanced: bool,
    pub binary_uniform: bool,
    pub bkrs: bool,
    pub bfm: bool,
    pub krr: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LcaCheck {
    pub ok: bool,
    pub witness: Option<[String; 4]>,
}

impl Serialize for HstTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_node(self.root).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HstTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = NodeJson::deserialize(d)?;
        let mut nodes = Vec::new();
        let root = build_json(&mut nodes, j);
        let t = HstTree { nodes, root };
        t.validate().map_err(serde::de::Error::custom)?;
        Ok(t)
    }
}

fn build_json(nodes: &mut Vec<Node>, j: NodeJson) -> usize {
    let node = match j {
        NodeJson::Leaf { point, delta } => Node {
            delta,
            children: vec![],
            point: Some(point),
        },
        NodeJson::Internal { delta, children } => Node {
            delta,
            children: children.into_iter().map(|c| build_json(nodes, c)).collect(),
            point: None,
        },
    };
    nodes.push(node);
    nodes.len() - 1
}

impl PartialEq for HstTree {
    fn eq(&self, other: &Self) -> bool {
        fn go(a: &HstTree, u: usize, b: &HstTree, v: usize) -> bool {
            let (x, y) = (&a.nodes[u], &b.nodes[v]);
            x.delta == y.delta
                && x.point == y.point
                && x.children.len() == y.children.len()
                && x.children.iter().zip(&y.children).all(|(&c, &d)| go(a, c, b, d))
        }
        go(self, self.root, other, other.root)
    }
}

impl HstTree {
    pub fn leaf(id: impl Into<String>) -> HstTree {
        HstTree {
            nodes: vec![Node {
                delta: 0.0,
                children: vec![],
                point: Some(id.into()),
            }],
            root: 0,
        }
    }

    /// Internal vertex with the given label over the given subtrees.
    pub fn node(delta: f64, children: Vec<HstTree>) -> HstTree {
        let mut nodes = Vec::new();
        let mut kids = Vec::new();
        for c in children {
            kids.push(append(&mut nodes, &c, c.root));
        }
        nodes.push(Node {
            delta,
            children: kids,
            point: None,
        });
        HstTree {
            root: nodes.len() - 1,
            nodes,
        }
    }

    /// Uniform space: a root over `b` leaves named `0..b`.
    pub fn star(b: usize, delta: f64) -> HstTree {
        if b == 1 {
            return HstTree::leaf("0");
        }
        HstTree::node(delta, (0..b).map(|i| HstTree::leaf(i.to_string())).collect())
    }

    /// Complete binary tree of the given height; depth-`i` labels `top·ratio^i`.
    pub fn complete(arity: usize, height: usize, top: f64, ratio: f64) -> HstTree {
        let mut counter = 0;
        complete_rec(arity, height, top, ratio, &mut counter)
    }

    /// Caterpillar with `depth` internal vertices: each has one leaf and one subtree.
    pub fn caterpillar(depth: usize, top: f64, ratio: f64) -> HstTree {
        let mut t = HstTree::leaf(depth.to_string());
        for i in (0..depth).rev() {
            t = HstTree::node(top * ratio.powi(i as i32), vec![HstTree::leaf(i.to_string()), t]);
        }
        t
    }

    pub fn from_arena(nodes: Vec<Node>, root: usize) -> Result<HstTree> {
        let t = HstTree { nodes, root };
        t.validate()?;
        Ok(t.compact())
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_ref(&self, u: usize) -> &Node {
        &self.nodes[u]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn delta(&self, u: usize) -> f64 {
        self.nodes[u].delta
    }

    pub fn children(&self, u: usize) -> &[usize] {
        &self.nodes[u].children
    }

    pub fn is_leaf(&self, u: usize) -> bool {
        self.nodes[u].is_leaf()
    }

    /// Nodes reachable from the root in preorder.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.nodes[u].children.iter().rev());
        }
        out
    }

    /// Leaf nodes in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        self.leaves_under(self.root)
    }

    pub fn leaves_under(&self, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![u];
        while let Some(v) = stack.pop() {
            if self.nodes[v].is_leaf() {
                out.push(v);
            } else {
                stack.extend(self.nodes[v].children.iter().rev());
            }
        }
        out
    }

    pub fn leaf_ids(&self) -> Vec<String> {
        self.leaves()
            .into_iter()
            .map(|u| self.nodes[u].point.clone().unwrap_or_default())
            .collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }

    /// Leaf count of every node's subtree, indexed by arena position.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![0; self.nodes.len()];
        for &u in self.preorder().iter().rev() {
            size[u] = if self.nodes[u].is_leaf() {
                1
            } else {
                self.nodes[u].children.iter().map(|&c| size[c]).sum()
            };
        }
        size
    }

    /// Edge height of the tree (a single leaf has height 0).
    pub fn height(&self) -> usize {
        let mut h = vec![0usize; self.nodes.len()];
        for &u in self.preorder().iter().rev() {
            h[u] = self.nodes[u]
                .children
                .iter()
                .map(|&c| h[c] + 1)
                .max()
                .unwrap_or(0);
        }
        h[self.root]
    }

    pub fn validate(&self) -> Result<()> {
        if self.root >= self.nodes.len() {
            return Err(Error::InvalidTree("root out of range".into()));
        }
        let mut seen_nodes = HashSet::new();
        let mut ids = HashSet::new();
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            if !seen_nodes.insert(u) {
                return Err(Error::InvalidTree(format!("node {u} reachable twice")));
            }
            let n = &self.nodes[u];
            if !(n.delta.is_finite() && n.delta >= 0.0) {
                return Err(Error::InvalidTree(format!("bad label {} at node {u}", n.delta)));
            }
            if n.is_leaf() {
                if n.delta != 0.0 {
                    return Err(Error::InvalidTree(format!("leaf {u} has nonzero label {}", n.delta)));
                }
                let id = n
                    .point
                    .as_ref()
                    .ok_or_else(|| Error::InvalidTree(format!("leaf {u} has no point id")))?;
                if !ids.insert(id.clone()) {
                    return Err(Error::InvalidTree(format!("duplicate leaf id `{id}`")));
                }
            } else {
                if n.delta == 0.0 {
                    return Err(Error::InvalidTree(format!("internal node {u} has label 0")));
                }
                if n.point.is_some() {
                    return Err(Error::InvalidTree(format!("internal node {u} carries a point")));
                }
                for &c in &n.children {
                    if c >= self.nodes.len() {
                        return Err(Error::InvalidTree(format!("child index {c} out of range")));
                    }
                    if self.nodes[c].delta > n.delta {
                        return Err(Error::InvalidTree(format!(
                            "child label {} exceeds parent label {}",
                            self.nodes[c].delta, n.delta
                        )));
                    }
                    stack.push(c);
                }
            }
        }
        Ok(())
    }

    /// Copy containing only nodes reachable from the root.
    fn compact(&self) -> HstTree {
        let mut nodes = Vec::new();
        let root = append(&mut nodes, self, self.root);
        HstTree { nodes, root }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_node(self.root)).expect("serializable")
    }

    fn to_json_node(&self, u: usize) -> NodeJson {
        let n = &self.nodes[u];
        match &n.point {
            Some(p) if n.is_leaf() => NodeJson::Leaf {
                point: p.clone(),
                delta: 0.0,
            },
            _ => NodeJson::Internal {
                delta: n.delta,
                children: n.children.iter().map(|&c| self.to_json_node(c)).collect(),
            },
        }
    }

    pub fn from_json(s: &str) -> Result<HstTree> {
        Ok(serde_json::from_str(s)?)
    }

    /// Lowest common ancestor of every pair of leaves, over the leaf order of [`leaves`].
    pub fn lca_matrix(&self) -> (Vec<usize>, Vec<usize>) {
        let leaves = self.leaves();
        let n = leaves.len();
        let pos: HashMap<usize, usize> = leaves.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let mut lca = vec![0usize; n * n];
        for (i, &u) in leaves.iter().enumerate() {
            lca[i * n + i] = u;
        }
        for u in self.preorder() {
            let kids = &self.nodes[u].children;
            if kids.len() < 2 {
                continue;
            }
            let groups: Vec<Vec<usize>> = kids
                .iter()
                .map(|&c| self.leaves_under(c).iter().map(|l| pos[l]).collect())
                .collect();
            for a in 0..groups.len() {
                for b in (a + 1)..groups.len() {
                    for &x in &groups[a] {
                        for &y in &groups[b] {
                            lca[x * n + y] = u;
                            lca[y * n + x] = u;
                        }
                    }
                }
            }
        }
        (leaves, lca)
    }

    /// The ultrametric `d(x,y) = Δ(lca(x,y))` on the leaves, in leaf order.
    pub fn to_metric(&self) -> Result<MetricSpace> {
        self.validate()?;
        let (leaves, lca) = self.lca_matrix();
        let n = leaves.len();
        let ids = leaves
            .iter()
            .map(|&u| self.nodes[u].point.clone().unwrap_or_default())
            .collect();
        Ok(MetricSpace::from_fn(ids, |i, j| self.nodes[lca[i * n + j]].delta))
    }

    /// Every parent/child pair satisfies `Δ(child) ≤ Δ(parent)/k`.
    pub fn check_khst(&self, k: f64) -> KhstCheck {
        for u in self.preorder() {
            let pd = self.nodes[u].delta;
            for &c in &self.nodes[u].children {
                let cd = self.nodes[c].delta;
                if cd > pd / k * (1.0 + 1e-12) {
                    return KhstCheck {
                        ok: false,
                        witness: Some((pd, cd)),
                    };
                }
            }
        }
        KhstCheck {
            ok: true,
            witness: None,
        }
    }

    pub fn is_khst(&self, k: f64) -> bool {
        self.check_khst(k).ok
    }

    /// Coalesces every internal vertex with exactly one child.
    pub fn remove_degenerate(&self) -> HstTree {
        fn go(t: &HstTree, mut u: usize, out: &mut Vec<Node>) -> usize {
            while t.nodes[u].children.len() == 1 {
                u = t.nodes[u].children[0];
            }
            let n = &t.nodes[u];
            let kids = n.children.iter().map(|&c| go(t, c, out)).collect();
            out.push(Node {
                delta: n.delta,
                children: kids,
                point: n.point.clone(),
            });
            out.len() - 1
        }
        let mut nodes = Vec::new();
        let root = go(self, self.root, &mut nodes);
        HstTree { nodes, root }
    }

    /// Top-down deletion of every non-root vertex whose label is at least `1/ℓ` of its kept parent.
    pub fn to_ell_hst(&self, ell: f64) -> Result<HstTree> {
        if !(ell > 1.0) {
            return param(format!("ell must exceed 1, got {ell}"));
        }
        fn collect(t: &HstTree, u: usize, limit: f64, ell: f64, kept: &mut Vec<usize>) {
            for &c in &t.nodes[u].children {
                let n = &t.nodes[c];
                if !n.is_leaf() && n.delta >= limit {
                    collect(t, c, limit, ell, kept);
                } else {
                    kept.push(c);
                }
            }
        }
        fn go(t: &HstTree, u: usize, ell: f64, out: &mut Vec<Node>) -> usize {
            let n = &t.nodes[u];
            let mut kept = Vec::new();
            collect(t, u, n.delta / ell, ell, &mut kept);
            let kids = kept.into_iter().map(|c| go(t, c, ell, out)).collect();
            out.push(Node {
                delta: n.delta,
                children: kids,
                point: n.point.clone(),
            });
            out.len() - 1
        }
        let mut nodes = Vec::new();
        let root = go(self, self.root, ell, &mut nodes);
        Ok(HstTree { nodes, root })
    }

    /// Every label multiplied by `gamma`.
    pub fn scale_labels(&self, gamma: f64) -> Result<HstTree> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return param(format!("scale factor must be positive, got {gamma}"));
        }
        let mut t = self.clone();
        for n in &mut t.nodes {
            n.delta *= gamma;
        }
        Ok(t)
    }

    /// Induced subtree on the given leaf ids; degenerate vertices are kept.
    pub fn induced<S: AsRef<str>>(&self, ids: &[S]) -> Result<HstTree> {
        let want: HashSet<&str> = ids.iter().map(|s| s.as_ref()).collect();
        let have: HashSet<&str> = self
            .leaves()
            .into_iter()
            .filter_map(|u| self.nodes[u].point.as_deref())
            .collect();
        if let Some(missing) = want.iter().find(|w| !have.contains(*w)) {
            return Err(Error::UnknownPoint(missing.to_string()));
        }
        if want.is_empty() {
            return param("induced subtree needs at least one leaf");
        }
        fn go(t: &HstTree, u: usize, want: &HashSet<&str>, out: &mut Vec<Node>) -> Option<usize> {
            let n = &t.nodes[u];
            if n.is_leaf() {
                if want.contains(n.point.as_deref().unwrap_or("")) {
                    out.push(n.clone());
                    return Some(out.len() - 1);
                }
                return None;
            }
            let kids: Vec<usize> = n.children.iter().filter_map(|&c| go(t, c, want, out)).collect();
            if kids.is_empty() {
                return None;
            }
            out.push(Node {
                delta: n.delta,
                children: kids,
                point: None,
            });
            Some(out.len() - 1)
        }
        let mut nodes = Vec::new();
        let root = go(self, self.root, &want, &mut nodes).expect("nonempty");
        Ok(HstTree { nodes, root })
    }

    /// Subtree keeping only the given arena nodes (which must be closed under parents).
    pub(crate) fn keep_nodes(&self, keep: &[bool]) -> HstTree {
        fn go(t: &HstTree, u: usize, keep: &[bool], out: &mut Vec<Node>) -> usize {
            let n = &t.nodes[u];
            let kids = n
                .children
                .iter()
                .filter(|&&c| keep[c])
                .map(|&c| go(t, c, keep, out))
                .collect();
            out.push(Node {
                delta: n.delta,
                children: kids,
                point: n.point.clone(),
            });
            out.len() - 1
        }
        let mut nodes = Vec::new();
        let root = go(self, self.root, keep, &mut nodes);
        HstTree { nodes, root }
    }

    pub fn is_balanced(&self, u: usize, sizes: &[usize]) -> bool {
        let kids = &self.nodes[u].children;
        let lo = kids.iter().map(|&c| sizes[c]).min().unwrap_or(0);
        let hi = kids.iter().map(|&c| sizes[c]).max().unwrap_or(0);
        hi - lo <= 1
    }

    /// Evaluates the subclass predicates with respect to separation `k`.
    pub fn classify(&self, k: f64) -> HstClass {
        let sizes = self.subtree_sizes();
        let internal: Vec<usize> = self.preorder().into_iter().filter(|&u| !self.is_leaf(u)).collect();
        let leaf_kids = |u: usize| self.nodes[u].children.iter().filter(|&&c| self.is_leaf(c)).count();
        let is_khst = self.is_khst(k);
        let bb = internal
            .iter()
            .all(|&u| self.is_balanced(u, &sizes) || self.nodes[u].children.len() <= 2);
        let bu = internal.iter().all(|&u| {
            let kids = &self.nodes[u].children;
            kids.len() <= 2 || leaf_kids(u) == kids.len()
        });
        let bk = internal.iter().all(|&u| {
            self.nodes[u].children.len() != 2 || self.is_balanced(u, &sizes) || leaf_kids(u) >= 1
        });
        let caterpillar = |t: &HstTree| {
            t.preorder().into_iter().filter(|&u| !t.is_leaf(u)).all(|u| {
                let kids = &t.nodes[u].children;
                kids.len() <= 2 && kids.iter().filter(|&&c| !t.is_leaf(c)).count() <= 1
            })
        };
        let bfm = caterpillar(self);
        let reduced = self.remove_degenerate();
        let uniform = reduced.height() <= 1;
        let krr = k > 1.0 && (uniform || (reduced.is_khst(k) && caterpillar(&reduced)));
        HstClass {
            is_khst,
            binary_balanced: is_khst && bb,
            binary_uniform: is_khst && bu,
            bkrs: is_khst && bu && bk,
            bfm,
            krr,
        }
    }

    /// Largest ultrametric below `m`, built by single linkage; equal-weight merges share one vertex.
    pub fn subdominant_ultrametric(m: &MetricSpace) -> HstTree {
        let n = m.len();
        let mut nodes: Vec<Node> = m
            .points()
            .iter()
            .map(|p| Node {
                delta: 0.0,
                children: vec![],
                point: Some(p.clone()),
            })
            .collect();
        if n == 1 {
            return HstTree { nodes, root: 0 };
        }
        // Prim: the minimum spanning tree carries every minimax path value.
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        let mut from = vec![0usize; n];
        let mut edges = Vec::with_capacity(n - 1);
        best[0] = 0.0;
        for _ in 0..n {
            let mut v = usize::MAX;
            for i in 0..n {
                if !in_tree[i] && (v == usize::MAX || best[i] < best[v]) {
                    v = i;
                }
            }
            in_tree[v] = true;
            if v != 0 {
                edges.push((best[v], from[v], v));
            }
            for i in 0..n {
                if !in_tree[i] && m.d(v, i) < best[i] {
                    best[i] = m.d(v, i);
                    from[i] = v;
                }
            }
        }
        edges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        let mut comp_node: Vec<usize> = (0..n).collect();
        let mut i = 0;
        while i < edges.len() {
            let w = edges[i].0;
            let mut j = i;
            while j < edges.len() && edges[j].0 == w {
                j += 1;
            }
            // Components before this weight class, grouped by their merged representative.
            let before: Vec<(usize, usize)> = edges[i..j]
                .iter()
                .flat_map(|&(_, a, b)| [a, b])
                .map(|x| {
                    let r = find(&mut uf, x);
                    (r, comp_node[r])
                })
                .collect();
            for &(_, a, b) in &edges[i..j] {
                let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
                if ra != rb {
                    uf[ra.max(rb)] = ra.min(rb);
                }
            }
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            let mut seen = HashSet::new();
            for (r_old, node) in before {
                if seen.insert(r_old) {
                    let r_new = find(&mut uf, r_old);
                    groups.entry(r_new).or_default().push(node);
                }
            }
            for (r, kids) in groups {
                nodes.push(Node {
                    delta: w,
                    children: kids,
                    point: None,
                });
                comp_node[r] = nodes.len() - 1;
            }
            i = j;
        }
        let root = comp_node[find(&mut uf, 0)];
        HstTree { nodes, root }.compact()
    }
}

fn append(nodes: &mut Vec<Node>, t: &HstTree, u: usize) -> usize {
    let n = &t.nodes[u];
    let kids = n.children.iter().map(|&c| append(nodes, t, c)).collect();
    nodes.push(Node {
        delta: n.delta,
        children: kids,
        point: n.point.clone(),
    });
    nodes.len() - 1
}

fn complete_rec(arity: usize, height: usize, top: f64, ratio: f64, counter: &mut usize) -> HstTree {
    if height == 0 {
        *counter += 1;
        return HstTree::leaf((*counter - 1).to_string());
    }
    let kids = (0..arity)
        .map(|_| complete_rec(arity, height - 1, top * ratio, ratio, counter))
        .collect();
    HstTree::node(top, kids)
}

/// Verifies `lca_T(a,b) = lca_T(c,d) ⟹ lca_W(a,b) = lca_W(c,d)` for all quadruples.
pub fn check_lca_consistency(t: &HstTree, w: &HstTree) -> Result<LcaCheck> {
    let (tl, tl_lca) = t.lca_matrix();
    let (wl, wl_lca) = w.lca_matrix();
    let tid: Vec<String> = tl.iter().map(|&u| t.nodes[u].point.clone().unwrap_or_default()).collect();
    let wpos: HashMap<&str, usize> = wl
        .iter()
        .enumerate()
        .map(|(i, &u)| (w.nodes[u].point.as_deref().unwrap_or(""), i))
        .collect();
    if tid.len() != wl.len() || tid.iter().any(|p| !wpos.contains_key(p.as_str())) {
        return Err(Error::Mismatch("trees have different leaf sets".into()));
    }
    let n = tid.len();
    let map: Vec<usize> = tid.iter().map(|p| wpos[p.as_str()]).collect();
    // Group pairs by their T-lca; each group must share one W-lca.
    let mut first: HashMap<usize, (usize, usize, usize)> = HashMap::new();
    for a in 0..n {
        for b in a..n {
            let tu = tl_lca[a * n + b];
            let wu = wl_lca[map[a] * n + map[b]];
            match first.get(&tu) {
                None => {
                    first.insert(tu, (a, b, wu));
                }
                Some(&(c, d, wv)) if wv != wu => {
                    return Ok(LcaCheck {
                        ok: false,
                        witness: Some([tid[a].clone(), tid[b].clone(), tid[c].clone(), tid[d].clone()]),
                    });
                }
                _ => {}
            }
        }
    }
    Ok(LcaCheck { ok: true, witness: None })
}

/// Same lca pattern in both directions, i.e. isomorphic underlying trees after coalescing.
pub fn lca_isomorphic(t: &HstTree, w: &HstTree) -> Result<bool> {
    Ok(check_lca_consistency(t, w)?.ok && check_lca_consistency(w, t)?.ok)
}

/// Random HST with at most `max_leaves` leaves; child labels are `parent / (k·U[1,2])`.
pub fn random_hst(max_leaves: usize, max_arity: usize, k: f64, rng: &mut impl rand::Rng) -> HstTree {
    let mut counter = 0;
    fn go(budget: usize, arity: usize, delta: f64, k: f64, rng: &mut impl rand::Rng, counter: &mut usize) -> HstTree {
        if budget <= 1 || rng.gen_bool(0.25) {
            *counter += 1;
            return HstTree::leaf((*counter - 1).to_string());
        }
        let b = rng.gen_range(1..=arity.min(budget).max(1));
        let mut kids = Vec::with_capacity(b);
        let mut left = budget;
        for i in 0..b {
            let share = if i + 1 == b { left } else { (left / (b - i)).max(1) };
            left -= share.min(left);
            let child_delta = delta / (k * rng.gen_range(1.0..2.0));
            kids.push(go(share, arity, child_delta, k, rng, counter));
            if left == 0 {
                break;
            }
        }
        HstTree::node(delta, kids)
    }
    go(max_leaves, max_arity.max(2), 1.0, k, rng, &mut counter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{path, uniform};

    fn l(id: &str) -> HstTree {
        HstTree::leaf(id)
    }

    #[test]
    fn to_metric_examples() {
        let t = HstTree::node(3.0, vec![l("a"), l("b")]);
        assert_eq!(t.to_metric().unwrap().matrix(), vec![vec![0.0, 3.0], vec![3.0, 0.0]]);
        assert_eq!(l("a").to_metric().unwrap().len(), 1);
        let t = HstTree::node(4.0, vec![l("a"), HstTree::node(1.0, vec![l("b"), l("c")])]);
        let m = t.to_metric().unwrap();
        assert_eq!((m.d(1, 2), m.d(0, 1), m.d(0, 2)), (1.0, 4.0, 4.0));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let t = HstTree::node(1.0, vec![l("a"), l("a")]);
        assert!(t.to_metric().is_err());
    }

    #[test]
    fn khst_examples() {
        let chain = |mid: f64| HstTree::node(4.0, vec![l("x"), HstTree::node(mid, vec![l("a"), l("b")])]);
        assert!(chain(1.0).check_khst(4.0).ok);
        let c = chain(2.0).check_khst(4.0);
        assert_eq!(c.witness, Some((4.0, 2.0)));
        assert!(chain(2.0).check_khst(1.0).ok);
    }

    #[test]
    fn remove_degenerate_examples() {
        let t = HstTree::node(1.0, vec![HstTree::node(0.5, vec![l("a")])]);
        assert_eq!(t.remove_degenerate(), l("a"));
        let t = HstTree::node(2.0, vec![l("a"), l("b")]);
        assert_eq!(t.remove_degenerate(), t);
        let bottom = HstTree::node(0.25, vec![l("a"), l("b")]);
        let t = HstTree::node(4.0, vec![HstTree::node(2.0, vec![HstTree::node(1.0, vec![bottom.clone()])])]);
        assert_eq!(t.remove_degenerate(), bottom);
    }

    #[test]
    fn to_ell_examples() {
        let t = HstTree::node(4.0, vec![l("x"), HstTree::node(0.5, vec![l("a"), l("b")])]);
        assert_eq!(t.to_ell_hst(4.0).unwrap(), t);
        let exact = HstTree::node(4.0, vec![l("x"), HstTree::node(1.0, vec![l("a"), l("b")])]);
        assert_eq!(exact.to_ell_hst(4.0).unwrap().height(), 1);
        let chain = HstTree::node(
            1.0,
            vec![l("x"), HstTree::node(0.5, vec![l("y"), HstTree::node(0.25, vec![l("a"), l("b")])])],
        );
        let out = chain.to_ell_hst(4.0).unwrap();
        assert_eq!(out.height(), 1);
        assert_eq!(out.leaf_count(), 4);
        let t = HstTree::node(1.0, vec![l("x"), HstTree::node(0.5, vec![l("a"), l("b")])]);
        assert_eq!(t.to_ell_hst(2.0).unwrap().height(), 1);
        assert!(t.to_ell_hst(1.0).is_err());
    }

    #[test]
    fn subdominant_examples() {
        let u = uniform(5, 2.0).unwrap();
        let t = HstTree::subdominant_ultrametric(&u);
        assert_eq!(t.height(), 1);
        assert_eq!(t.delta(t.root()), 2.0);
        let p = path(3, 1.0).unwrap();
        let t = HstTree::subdominant_ultrametric(&p);
        let um = t.to_metric().unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| i == j || um.d(i, j) == 1.0)));
        assert_eq!(p.approximation_factor(&um).unwrap().alpha, 2.0);
        let two = path(2, 3.0).unwrap();
        let t = HstTree::subdominant_ultrametric(&two);
        assert_eq!(two.approximation_factor(&t.to_metric().unwrap()).unwrap().alpha, 1.0);
    }

    #[test]
    fn classify_examples() {
        let star = HstTree::star(5, 1.0);
        let c = star.classify(2.0);
        assert!(c.binary_uniform && c.krr && c.binary_balanced);
        let cb = HstTree::complete(2, 3, 1.0, 0.25);
        assert!(cb.classify(4.0).binary_balanced);
        let cat = HstTree::caterpillar(4, 1.0, 0.25);
        let c = cat.classify(4.0);
        assert!(c.bfm && c.bkrs && c.krr);
    }

    #[test]
    fn lca_examples() {
        let t = HstTree::node(
            2.0,
            vec![HstTree::node(1.0, vec![l("a"), l("b")]), HstTree::node(1.0, vec![l("c"), l("d")])],
        );
        assert!(check_lca_consistency(&t, &t).unwrap().ok);
        let w = HstTree::node(
            2.0,
            vec![HstTree::node(1.0, vec![l("a"), l("c")]), HstTree::node(1.0, vec![l("b"), l("d")])],
        );
        let r = check_lca_consistency(&t, &w).unwrap();
        assert!(!r.ok && r.witness.is_some());
        let star = HstTree::node(1.0, vec![l("a"), l("b"), l("c"), l("d")]);
        assert!(check_lca_consistency(&t, &star).unwrap().ok);
        assert!(!lca_isomorphic(&t, &star).unwrap());
        assert!(check_lca_consistency(&t, &HstTree::star(3, 1.0)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = HstTree::node(4.0, vec![l("a"), HstTree::node(0.1, vec![l("b"), l("c")])]);
        let s = t.to_json();
        assert!(s.contains("\"point\":\"a\""));
        assert_eq!(HstTree::from_json(&s).unwrap(), t);
    }
}
