//! Types of vertices in an elimination tree, valid pruning, and the
//! resulting kernel for first-order model checking.
//!
//! The type of `v` is the subtree rooted at `v` in which every vertex is
//! labelled by its ancestor vector. Types are interned in a [`TypeTable`]:
//! a type is the pair (ancestor vector, multiset of child types), so two
//! vertices share an id iff their labelled subtrees are isomorphic.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::graph::{Graph, NodeId};
use crate::logic::DenseStructure;
use crate::treedepth::{is_coherent, is_valid_model, Model, ModelError};

pub type TypeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("kernel parameter k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `bits[j]` is set iff the vertex is adjacent to its ancestor at depth `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AncestorVector(pub Vec<bool>);

impl fmt::Display for AncestorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", b as u8)?;
        }
        Ok(())
    }
}

pub fn ancestor_vector(g: &Graph, m: &Model, v: NodeId) -> AncestorVector {
    let anc = m.ancestors(v);
    // anc[i] sits at depth depth(v) - i, so depth j is anc[depth(v) - j]
    let d = m.depth(v);
    AncestorVector((0..d).map(|j| g.adjacent_ids(v, anc[d - j])).collect())
}

/// One interned type: the ancestor vector and the sorted multiset of child types.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeKey {
    pub vector: AncestorVector,
    pub children: Vec<TypeId>,
}

impl TypeKey {
    pub fn depth(&self) -> usize {
        self.vector.0.len()
    }
}

/// Label-independent canonical form of a type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeCode(pub String);

impl fmt::Display for TypeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, Default)]
pub struct TypeTable {
    keys: Vec<TypeKey>,
    index: HashMap<TypeKey, TypeId>,
}

impl TypeTable {
    pub fn intern(&mut self, mut key: TypeKey) -> TypeId {
        key.children.sort_unstable();
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.keys.len();
        self.keys.push(key.clone());
        self.index.insert(key, id);
        id
    }

    pub fn lookup(&self, key: &TypeKey) -> Option<TypeId> {
        let mut key = key.clone();
        key.children.sort_unstable();
        self.index.get(&key).copied()
    }

    pub fn key(&self, id: TypeId) -> &TypeKey {
        &self.keys[id]
    }

    pub fn keys(&self) -> &[TypeKey] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// AHU-style canonical string: `[<vector>:<child codes in sorted order>]`.
    pub fn code(&self, id: TypeId) -> TypeCode {
        let key = &self.keys[id];
        let mut kids: Vec<String> = key.children.iter().map(|&c| self.code(c).0).collect();
        kids.sort();
        TypeCode(format!("[{}:{}]", key.vector, kids.concat()))
    }
}

/// Types of every vertex of a model, computed bottom-up into `table`.
fn all_types(g: &Graph, m: &Model, table: &mut TypeTable) -> BTreeMap<NodeId, TypeId> {
    let mut types = BTreeMap::new();
    for v in m.bottom_up() {
        let children = m.children(v).iter().map(|c| types[c]).collect();
        let id = table.intern(TypeKey { vector: ancestor_vector(g, m, v), children });
        types.insert(v, id);
    }
    types
}

pub fn compute_type(g: &Graph, m: &Model, v: NodeId) -> TypeCode {
    let mut table = TypeTable::default();
    let types = all_types(g, m, &mut table);
    table.code(types[&v])
}

/// Output of [`k_reduce`].
#[derive(Clone, Debug)]
pub struct Reduction {
    pub graph: Graph,
    pub model: Model,
    pub k: usize,
    pub kernel: Graph,
    /// Roots of pruned subtrees.
    pub pruned: BTreeSet<NodeId>,
    /// Every vertex inside a pruned subtree.
    pub deleted: BTreeSet<NodeId>,
    /// Type of each deleted vertex when it was deleted; final type for survivors.
    pub end_type: BTreeMap<NodeId, TypeId>,
    pub types: TypeTable,
    /// Pruned roots with their depth, in pruning order.
    pub prune_log: Vec<(NodeId, usize)>,
}

/// Applies valid pruning deepest-first until every vertex has at most `k`
/// children of each type.
///
/// Parents are handled level by level from the bottom: pruning below depth
/// `d` never changes types at depth `> d`, so all prunings at one level can
/// be done before moving up. Ties: parents in ascending id, and within an
/// over-full class the `k` smallest ids are kept.
pub fn k_reduce(g: &Graph, m: &Model, k: usize) -> Result<Reduction, KernelError> {
    if k == 0 {
        return Err(KernelError::ZeroK);
    }
    if !is_valid_model(g, m, m.height())? {
        return Err(ModelError::Invalid.into());
    }
    if !is_coherent(g, m) {
        let v = crate::treedepth::coherence_witness(g, m).unwrap_err();
        return Err(v.into());
    }
    let mut table = TypeTable::default();
    let mut current: BTreeMap<NodeId, TypeId> = BTreeMap::new();
    let mut pruned = BTreeSet::new();
    let mut deleted = BTreeSet::new();
    let mut end_type = BTreeMap::new();
    let mut prune_log = Vec::new();

    let mut by_depth: Vec<Vec<NodeId>> = vec![Vec::new(); m.height() + 1];
    for v in m.nodes() {
        by_depth[m.depth(v)].push(v);
    }
    for d in (0..by_depth.len()).rev() {
        for &v in &by_depth[d] {
            let mut classes: BTreeMap<TypeId, Vec<NodeId>> = BTreeMap::new();
            for &c in m.children(v) {
                classes.entry(current[&c]).or_default().push(c);
            }
            let mut kept = Vec::new();
            let mut excess = Vec::new();
            for (ty, members) in classes {
                for (i, c) in members.into_iter().enumerate() {
                    if i < k {
                        kept.push(ty);
                    } else {
                        excess.push(c);
                    }
                }
            }
            excess.sort_unstable_by(|a, b| b.cmp(a));
            for u in excess {
                pruned.insert(u);
                prune_log.push((u, d + 1));
                for x in m.subtree(u) {
                    deleted.insert(x);
                    end_type.insert(x, current[&x]);
                }
            }
            let id = table.intern(TypeKey { vector: ancestor_vector(g, m, v), children: kept });
            current.insert(v, id);
        }
    }
    for (&v, &ty) in &current {
        end_type.entry(v).or_insert(ty);
    }
    let survivors: BTreeSet<NodeId> = m.nodes().filter(|v| !deleted.contains(v)).collect();
    let kernel = g.induced_subgraph(&survivors).expect("survivors are graph vertices");
    Ok(Reduction {
        graph: g.clone(),
        model: m.clone(),
        k,
        kernel,
        pruned,
        deleted,
        end_type,
        types: table,
        prune_log,
    })
}

impl Reduction {
    pub fn survives(&self, v: NodeId) -> bool {
        !self.deleted.contains(&v)
    }

    /// Children of `v` that are not roots of pruned subtrees.
    pub fn unpruned_children(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.model.children(v).iter().copied().filter(|c| !self.pruned.contains(c))
    }

    /// The model restricted to the kernel.
    pub fn kernel_model(&self) -> Model {
        let parents = self
            .model
            .parents()
            .iter()
            .filter(|(v, _)| self.survives(**v))
            .map(|(&v, &p)| (v, p))
            .collect();
        Model::from_parents(parents).expect("restriction of a tree to an ancestor-closed set")
    }

    /// For every pruned root `u` with parent `v`: `v` keeps exactly `k`
    /// unpruned children whose end type is the end type of `u`.
    pub fn exactly_k_check(&self) -> bool {
        self.pruned.iter().all(|&u| {
            let v = self.model.parent(u).expect("the root is never pruned");
            let ty = self.end_type[&u];
            self.unpruned_children(v).filter(|c| self.end_type[c] == ty).count() == self.k
        })
    }

    /// Number of distinct end types among kernel vertices, per depth.
    pub fn distinct_end_types_by_depth(&self) -> BTreeMap<usize, usize> {
        let mut sets: BTreeMap<usize, BTreeSet<TypeId>> = BTreeMap::new();
        for v in self.kernel.ids() {
            sets.entry(self.model.depth(*v)).or_default().insert(self.end_type[v]);
        }
        sets.into_iter().map(|(d, s)| (d, s.len())).collect()
    }

    /// `<id> <depth> <pruned> <deleted> <end-type>` per vertex, then
    /// `T <index> <canonical code>` for every end type in use.
    pub fn to_dump(&self) -> String {
        let mut out = String::from("# id depth pruned deleted end-type\n");
        for v in self.model.nodes() {
            out.push_str(&format!(
                "{v} {} {} {} {}\n",
                self.model.depth(v),
                self.pruned.contains(&v) as u8,
                self.deleted.contains(&v) as u8,
                self.end_type[&v]
            ));
        }
        let used: BTreeSet<TypeId> = self.end_type.values().copied().collect();
        for t in used {
            out.push_str(&format!("T {t} {}\n", self.types.code(t)));
        }
        out
    }
}

/// Checks that every end type is reproducible from the vertex's ancestor
/// vector and the end types of its unpruned children, and that the pruning
/// left exactly `k` copies wherever something was pruned and never more.
pub fn end_type_consistency_check(r: &Reduction) -> bool {
    r.model.nodes().all(|v| {
        let kids: Vec<TypeId> = r.unpruned_children(v).map(|c| r.end_type[&c]).collect();
        let mut counts: BTreeMap<TypeId, usize> = BTreeMap::new();
        for &t in &kids {
            *counts.entry(t).or_default() += 1;
        }
        if counts.values().any(|&c| c > r.k) {
            return false;
        }
        let pruned_ok = r.model.children(v).iter().filter(|c| r.pruned.contains(c)).all(|c| {
            counts.get(&r.end_type[c]).copied().unwrap_or(0) == r.k
        });
        let key = TypeKey { vector: ancestor_vector(&r.graph, &r.model, v), children: kids };
        pruned_ok && r.types.lookup(&key) == Some(r.end_type[&v])
    })
}

/// Upper bound on the number of end types at depth `d` in a `k`-reduced
/// graph of treedepth at most `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeBound {
    Exact(BigUint),
    /// Too large to materialize; at least `2^bits`.
    Huge { bits: u64 },
}

impl TypeBound {
    pub fn admits(&self, count: usize) -> bool {
        match self {
            TypeBound::Exact(v) => BigUint::from(count) <= *v,
            TypeBound::Huge { .. } => true,
        }
    }
}

/// Largest bound materialized exactly, in bits.
const MAX_EXACT_BITS: f64 = 1_048_576.0;

/// `f_t = 2^t` and `f_d = 2^d · (k+1)^{f_{d+1}}`.
pub fn type_bound(k: usize, t: usize, d: usize) -> TypeBound {
    assert!(d <= t, "depth {d} exceeds height {t}");
    let mut f = TypeBound::Exact(BigUint::one() << t);
    for level in (d..t).rev() {
        f = match f {
            TypeBound::Exact(e) => {
                let bits = e.to_f64().unwrap_or(f64::INFINITY) * ((k + 1) as f64).log2() + level as f64;
                match e.to_u32() {
                    Some(exp) if bits <= MAX_EXACT_BITS => {
                        TypeBound::Exact(BigUint::from(k + 1).pow(exp) << level)
                    }
                    _ => TypeBound::Huge { bits: bits.min(u64::MAX as f64) as u64 },
                }
            }
            TypeBound::Huge { bits } => TypeBound::Huge { bits: bits.saturating_mul(2).max(bits) },
        };
    }
    f
}

/// The labelled tree a type unfolds to, with the graph it describes.
#[derive(Clone, Debug)]
pub struct ExpandedType {
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    pub types: Vec<TypeId>,
    pub graph: DenseStructure,
}

/// Unfolds `root` of a type table (given as keys) into its labelled tree and
/// the graph defined by the ancestor vectors. Vertices are numbered in
/// preorder with children in ascending type order. Returns `None` if an index
/// is out of range, a child is not exactly one level deeper than its parent,
/// or the tree would exceed `max_vertices`.
pub fn expand_type(keys: &[TypeKey], root: TypeId, max_vertices: usize) -> Option<ExpandedType> {
    let mut out = ExpandedType { parent: Vec::new(), depth: Vec::new(), types: Vec::new(), graph: DenseStructure::new(0) };
    let mut stack = vec![(root, None::<usize>)];
    let mut vectors: Vec<&AncestorVector> = Vec::new();
    while let Some((ty, parent)) = stack.pop() {
        let key = keys.get(ty)?;
        let depth = parent.map_or(0, |p| out.depth[p] + 1);
        if key.depth() != depth || out.types.len() >= max_vertices {
            return None;
        }
        let me = out.types.len();
        out.parent.push(parent);
        out.depth.push(depth);
        out.types.push(ty);
        vectors.push(&key.vector);
        let mut kids = key.children.clone();
        kids.sort_unstable();
        for &c in kids.iter().rev() {
            stack.push((c, Some(me)));
        }
    }
    let n = out.types.len();
    let mut graph = DenseStructure::new(n);
    for v in 0..n {
        let mut anc = out.parent[v];
        while let Some(a) = anc {
            if vectors[v].0[out.depth[a]] {
                graph.set(v, a, true);
            }
            anc = out.parent[a];
        }
    }
    out.graph = graph;
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ef::ef_equivalent;
    use crate::treedepth::balanced_path_model;

    fn star_model(leaves: usize) -> Model {
        Model::from_parents((1..=leaves as u64 + 1).map(|i| (NodeId(i), NodeId(1))).collect()).unwrap()
    }

    #[test]
    fn ancestor_vectors_on_fig1() {
        let (g, m) = (Graph::path(7), balanced_path_model(7));
        assert_eq!(ancestor_vector(&g, &m, NodeId(4)).0, Vec::<bool>::new());
        assert_eq!(ancestor_vector(&g, &m, NodeId(3)).0, vec![true, true]);
        assert_eq!(ancestor_vector(&g, &m, NodeId(1)).0, vec![false, true]);
    }

    #[test]
    fn type_codes() {
        let (g, m) = (Graph::path(7), balanced_path_model(7));
        assert_eq!(compute_type(&g, &m, NodeId(1)), compute_type(&g, &m, NodeId(7)));
        assert_ne!(compute_type(&g, &m, NodeId(1)), compute_type(&g, &m, NodeId(3)));
        assert_eq!(compute_type(&g, &m, NodeId(2)), compute_type(&g, &m, NodeId(6)));

        let (s, sm) = (Graph::star(10), star_model(10));
        let leaf = compute_type(&s, &sm, NodeId(2));
        assert!((3..=11).all(|i| compute_type(&s, &sm, NodeId(i)) == leaf));
        assert_eq!(leaf.0, "[1:]");
    }

    #[test]
    fn star_reduces_to_k_leaves() {
        let r = k_reduce(&Graph::star(5), &star_model(5), 2).unwrap();
        assert_eq!(r.kernel, Graph::star(2));
        assert_eq!(r.pruned, [4, 5, 6].into_iter().map(NodeId).collect());
        assert_eq!(r.prune_log, vec![(NodeId(6), 1), (NodeId(5), 1), (NodeId(4), 1)]);
        assert!(ef_equivalent(&Graph::star(5), &r.kernel, 2).unwrap());
        for m in 2..12 {
            let r = k_reduce(&Graph::star(m), &star_model(m), 2).unwrap();
            assert_eq!(r.kernel.len(), 3);
        }
    }

    #[test]
    fn reduced_graph_is_fixpoint() {
        let r = k_reduce(&Graph::path(7), &balanced_path_model(7), 2).unwrap();
        assert_eq!(r.kernel, Graph::path(7));
        assert!(r.prune_log.is_empty());
        // with k = 1 the two halves below the root have the same type
        let r = k_reduce(&Graph::path(7), &balanced_path_model(7), 1).unwrap();
        assert_eq!(r.kernel, Graph::path(4));
        assert_eq!(r.prune_log, vec![(NodeId(6), 1)]);
        let (g, m) = (Graph::star(2), star_model(2));
        let r = k_reduce(&g, &m, 2).unwrap();
        assert_eq!(r.kernel, g);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(k_reduce(&Graph::star(2), &star_model(2), 0).unwrap_err(), KernelError::ZeroK);
        // 3 hangs below 1 but only touches 2
        let p3 = Graph::path(3);
        let bad = Model::from_parents(
            [(1, 2), (2, 2), (3, 1)].into_iter().map(|(a, b)| (NodeId(a), NodeId(b))).collect(),
        )
        .unwrap();
        assert!(matches!(k_reduce(&p3, &bad, 1), Err(KernelError::Model(ModelError::NotCoherent(_)))));
    }

    #[test]
    fn consistency_check_detects_corruption() {
        let r = k_reduce(&Graph::star(5), &star_model(5), 2).unwrap();
        assert!(end_type_consistency_check(&r));
        assert!(r.exactly_k_check());
        let mut bad = r.clone();
        let root_type = bad.end_type[&NodeId(1)];
        bad.end_type.insert(NodeId(2), root_type);
        assert!(!end_type_consistency_check(&bad));

        let k1 = k_reduce(&Graph::path(1), &star_model(0), 1).unwrap();
        assert!(end_type_consistency_check(&k1));
    }

    #[test]
    fn type_bound_values() {
        for k in 1..4 {
            for t in 0..4 {
                assert_eq!(type_bound(k, t, t), TypeBound::Exact(BigUint::from(1u32 << t)));
            }
        }
        assert_eq!(type_bound(1, 1, 0), TypeBound::Exact(BigUint::from(4u32)));
        assert_eq!(type_bound(5, 0, 0), TypeBound::Exact(BigUint::from(1u32)));
        // f_1(2,2) = 2 * 3^4
        assert_eq!(type_bound(2, 2, 1), TypeBound::Exact(BigUint::from(162u32)));
        assert_eq!(type_bound(2, 2, 0), TypeBound::Exact(BigUint::from(3u32).pow(162)));
        assert!(matches!(type_bound(2, 3, 0), TypeBound::Huge { .. }));
    }

    #[test]
    fn expansion_reproduces_kernel() {
        let r = k_reduce(&Graph::star(6), &star_model(6), 3).unwrap();
        let e = expand_type(r.types.keys(), r.end_type[&NodeId(1)], 100).unwrap();
        assert_eq!(e.types.len(), 4);
        use crate::logic::Structure;
        assert_eq!((0..4).filter(|&v| e.graph.related(0, v)).count(), 3);
        assert!(expand_type(r.types.keys(), 99, 100).is_none());
        assert!(expand_type(r.types.keys(), r.end_type[&NodeId(1)], 2).is_none());
    }

    #[test]
    fn dump_format() {
        let r = k_reduce(&Graph::star(3), &star_model(3), 2).unwrap();
        let dump = r.to_dump();
        assert!(dump.contains("\n4 1 1 1 0\n"));
        assert!(dump.contains("T 0 [1:]\n"));
    }
}
