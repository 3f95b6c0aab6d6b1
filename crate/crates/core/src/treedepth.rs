//! Elimination trees ("models"), their validation, an exact treedepth solver
//! for small graphs, and the coherence transformation.
//!
//! Depth convention: the root has depth 0 and the height of a model is the
//! largest depth of a vertex. A `t`-model is a model of height at most `t`.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::graph::{Graph, NodeId};

/// Graphs larger than this are refused by [`compute_treedepth_exact`].
pub const EXACT_SOLVER_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("model has no root")]
    NoRoot,
    #[error("model has several roots ({0} and {1})")]
    MultipleRoots(NodeId, NodeId),
    #[error("parent pointers of {0} never reach the root")]
    Cycle(NodeId),
    #[error("parent {parent} of {node} is not a model vertex")]
    UnknownParent { node: NodeId, parent: NodeId },
    #[error("depth of {node} is {claimed}, expected {actual}")]
    DepthMismatch { node: NodeId, claimed: usize, actual: usize },
    #[error("model vertex set differs from the graph vertex set")]
    NodeSetMismatch,
    #[error("model is not a valid model of the graph")]
    Invalid,
    #[error("subtree of {0} has no vertex adjacent to its parent")]
    NotCoherent(NodeId),
    #[error("graph has {n} vertices; exact solver limit is {limit}")]
    TooLarge { n: usize, limit: usize },
}

/// A rooted tree on the vertex set of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    root: NodeId,
    parent: BTreeMap<NodeId, NodeId>,
    depth: BTreeMap<NodeId, usize>,
    children: BTreeMap<NodeId, Vec<NodeId>>,
}

impl Model {
    /// Builds a model from parent pointers; the root points to itself.
    pub fn from_parents(parent: BTreeMap<NodeId, NodeId>) -> Result<Model, ModelError> {
        let mut root = None;
        for (&v, &p) in &parent {
            if v == p {
                if let Some(r) = root {
                    return Err(ModelError::MultipleRoots(r, v));
                }
                root = Some(v);
            } else if !parent.contains_key(&p) {
                return Err(ModelError::UnknownParent { node: v, parent: p });
            }
        }
        let root = root.ok_or(ModelError::NoRoot)?;
        let mut depth: BTreeMap<NodeId, usize> = BTreeMap::new();
        depth.insert(root, 0);
        for &v in parent.keys() {
            let mut chain = Vec::new();
            let mut cur = v;
            while !depth.contains_key(&cur) {
                chain.push(cur);
                if chain.len() > parent.len() {
                    return Err(ModelError::Cycle(v));
                }
                cur = parent[&cur];
            }
            let mut d = depth[&cur];
            for &u in chain.iter().rev() {
                d += 1;
                depth.insert(u, d);
            }
        }
        let mut children: BTreeMap<NodeId, Vec<NodeId>> = parent.keys().map(|&v| (v, Vec::new())).collect();
        for (&v, &p) in &parent {
            if v != p {
                children.get_mut(&p).expect("parent is a vertex").push(v);
            }
        }
        Ok(Model { root, parent, depth, children })
    }

    /// Builds a model from `(node, parent, depth)` triples, checking the depths.
    pub fn from_entries(entries: &[(NodeId, NodeId, usize)]) -> Result<Model, ModelError> {
        let parent = entries.iter().map(|&(v, p, _)| (v, p)).collect();
        let m = Model::from_parents(parent)?;
        for &(v, _, d) in entries {
            let actual = m.depth[&v];
            if d != actual {
                return Err(ModelError::DepthMismatch { node: v, claimed: d, actual });
            }
        }
        Ok(m)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.parent.keys().copied()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.parent.contains_key(&v)
    }

    /// Parent of `v`; `None` for the root.
    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.parent[&v];
        (p != v).then_some(p)
    }

    pub fn parents(&self) -> &BTreeMap<NodeId, NodeId> {
        &self.parent
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[&v]
    }

    pub fn height(&self) -> usize {
        self.depth.values().copied().max().unwrap_or(0)
    }

    /// Children of `v` in ascending identifier order.
    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[&v]
    }

    /// `v`, its parent, ..., the root.
    pub fn ancestors(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out
    }

    /// The ancestor of `v` at depth `d` (`d <= depth(v)`).
    pub fn ancestor_at_depth(&self, v: NodeId, d: usize) -> NodeId {
        let mut cur = v;
        while self.depth[&cur] > d {
            cur = self.parent[&cur];
        }
        cur
    }

    /// True iff `a` is an ancestor of `v` or equal to it.
    pub fn is_ancestor_or_self(&self, a: NodeId, v: NodeId) -> bool {
        let da = self.depth[&a];
        self.depth[&v] >= da && self.ancestor_at_depth(v, da) == a
    }

    /// Vertices of the subtree rooted at `v`, in preorder.
    pub fn subtree(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[&u].iter().rev());
        }
        out
    }

    /// Vertices ordered by non-increasing depth, ties by identifier.
    pub fn bottom_up(&self) -> Vec<NodeId> {
        let mut order: Vec<NodeId> = self.nodes().collect();
        order.sort_by_key(|v| (std::cmp::Reverse(self.depth[v]), *v));
        order
    }

    /// Serializes as `m <node> <parent> <depth>` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (&v, &p) in &self.parent {
            out.push_str(&format!("m {v} {p} {}\n", self.depth[&v]));
        }
        out
    }
}

pub fn load_model(text: &str) -> Result<Model, ModelError> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| ModelError::Parse { line: lineno + 1, msg };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.as_slice() {
            ["m", v, p, d] => {
                let num = |s: &str| s.parse::<u64>().map_err(|_| err(format!("bad number `{s}`")));
                entries.push((NodeId(num(v)?), NodeId(num(p)?), num(d)? as usize));
            }
            _ => return Err(err(format!("unrecognized line `{content}`"))),
        }
    }
    Model::from_entries(&entries)
}

fn same_vertex_set(g: &Graph, m: &Model) -> bool {
    g.len() == m.len() && g.ids().iter().all(|&v| m.contains(v))
}

/// True iff `m` is a model of `g` of height at most `t`.
pub fn is_valid_model(g: &Graph, m: &Model, t: usize) -> Result<bool, ModelError> {
    if !same_vertex_set(g, m) {
        return Err(ModelError::NodeSetMismatch);
    }
    if m.height() > t {
        return Ok(false);
    }
    Ok(g.edge_ids().all(|(a, b)| m.is_ancestor_or_self(a, b) || m.is_ancestor_or_self(b, a)))
}

fn touches(g: &Graph, set: &[NodeId], v: NodeId) -> bool {
    set.iter().any(|&u| g.adjacent_ids(u, v))
}

/// True iff every child subtree contains a vertex adjacent to its parent.
pub fn is_coherent(g: &Graph, m: &Model) -> bool {
    m.nodes()
        .all(|v| m.parent(v).is_none_or(|p| touches(g, &m.subtree(v), p)))
}

/// Turns a valid model into a coherent one of no larger height by
/// reattaching every detached subtree to the lowest ancestor it touches.
pub fn make_coherent(g: &Graph, m: &Model) -> Result<Model, ModelError> {
    if !is_valid_model(g, m, m.height())? {
        return Err(ModelError::Invalid);
    }
    let mut current = m.clone();
    loop {
        let violation = current.nodes().find_map(|w| {
            let p = current.parent(w)?;
            let sub = current.subtree(w);
            (!touches(g, &sub, p)).then_some((w, p, sub))
        });
        let Some((w, p, sub)) = violation else {
            return Ok(current);
        };
        // G_w reaches the rest of the graph only through ancestors of w, and
        // not through p, so a strictly higher ancestor is adjacent to it.
        let target = current.ancestors(p)[1..]
            .iter()
            .copied()
            .find(|&a| touches(g, &sub, a))
            .ok_or(ModelError::Invalid)?;
        let mut parents = current.parents().clone();
        parents.insert(w, target);
        current = Model::from_parents(parents)?;
    }
}

/// For every non-root `v`, the smallest-identifier vertex of the subtree of
/// `v` adjacent to the parent of `v`.
pub fn coherence_witness(g: &Graph, m: &Model) -> Result<BTreeMap<NodeId, NodeId>, ModelError> {
    let mut out = BTreeMap::new();
    for v in m.nodes() {
        let Some(p) = m.parent(v) else { continue };
        let exit = m
            .subtree(v)
            .into_iter()
            .filter(|&u| g.adjacent_ids(u, p))
            .min()
            .ok_or(ModelError::NotCoherent(v))?;
        out.insert(v, exit);
    }
    Ok(out)
}

struct ExactSolver {
    nbr: Vec<u32>,
    memo: HashMap<u32, (u8, u8)>,
}

impl ExactSolver {
    fn components(&self, set: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut left = set;
        while left != 0 {
            let start = left & left.wrapping_neg();
            let mut comp = start;
            let mut frontier = start;
            while frontier != 0 {
                let mut next = 0;
                let mut f = frontier;
                while f != 0 {
                    let i = f.trailing_zeros() as usize;
                    f &= f - 1;
                    next |= self.nbr[i];
                }
                next &= set & !comp;
                comp |= next;
                frontier = next;
            }
            out.push(comp);
            left &= !comp;
        }
        out
    }

    /// Treedepth (height convention) of the connected vertex set `set`, with
    /// the root that achieves it. `budget` is an exclusive upper bound that
    /// lets the search stop early; when no root beats it the returned value
    /// is `>= budget` and not memoized.
    fn solve(&mut self, set: u32, budget: u8) -> (u8, u8) {
        let size = set.count_ones() as u8;
        if size == 1 {
            return (0, set.trailing_zeros() as u8);
        }
        if let Some(&hit) = self.memo.get(&set) {
            return hit;
        }
        let is_clique = (0..32).filter(|i| set >> i & 1 == 1).all(|i| (self.nbr[i] | 1 << i) & set == set);
        if is_clique {
            let res = (size - 1, set.trailing_zeros() as u8);
            self.memo.insert(set, res);
            return res;
        }
        let mut best = (budget.min(size), u8::MAX);
        let mut bits = set;
        while bits != 0 {
            let v = bits.trailing_zeros();
            bits &= bits - 1;
            let mut worst = 0u8;
            for comp in self.components(set & !(1 << v)) {
                if worst + 1 >= best.0 {
                    break;
                }
                let (td, _) = self.solve(comp, best.0 - 1);
                worst = worst.max(td);
            }
            if worst + 1 < best.0 {
                best = (worst + 1, v as u8);
            }
        }
        if best.1 != u8::MAX {
            self.memo.insert(set, best);
        }
        best
    }

    fn build(&mut self, set: u32, parent: Option<u8>, out: &mut Vec<(u8, u8)>) {
        let (_, root) = self.solve(set, u8::MAX);
        out.push((root, parent.unwrap_or(root)));
        for comp in self.components(set & !(1 << root)) {
            self.build(comp, Some(root), out);
        }
    }
}

/// Exact treedepth of a graph with at most [`EXACT_SOLVER_LIMIT`] vertices,
/// with a witnessing model. Models produced here are coherent.
pub fn compute_treedepth_exact(g: &Graph) -> Result<(usize, Model), ModelError> {
    let n = g.len();
    if n > EXACT_SOLVER_LIMIT {
        return Err(ModelError::TooLarge { n, limit: EXACT_SOLVER_LIMIT });
    }
    let nbr = (0..n)
        .map(|i| g.neighbors(i).iter().fold(0u32, |acc, &j| acc | 1 << j))
        .collect();
    let mut solver = ExactSolver { nbr, memo: HashMap::new() };
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let (td, _) = solver.solve(all, u8::MAX);
    let mut pairs = Vec::new();
    solver.build(all, None, &mut pairs);
    let parents = pairs
        .into_iter()
        .map(|(v, p)| (g.id(v as usize), g.id(p as usize)))
        .collect();
    let model = Model::from_parents(parents)?;
    debug_assert_eq!(model.height(), td as usize);
    Ok((td as usize, model))
}

/// Balanced model of the path on ids `1..=n`: the middle vertex is the root
/// and both halves recurse.
pub fn balanced_path_model(n: usize) -> Model {
    fn go(lo: u64, hi: u64, parent: Option<u64>, out: &mut BTreeMap<NodeId, NodeId>) {
        if lo > hi {
            return;
        }
        let mid = (lo + hi) / 2;
        out.insert(NodeId(mid), NodeId(parent.unwrap_or(mid)));
        if mid > lo {
            go(lo, mid - 1, Some(mid), out);
        }
        go(mid + 1, hi, Some(mid), out);
    }
    let mut parents = BTreeMap::new();
    go(1, n as u64, None, &mut parents);
    Model::from_parents(parents).expect("balanced path model is a tree")
}
