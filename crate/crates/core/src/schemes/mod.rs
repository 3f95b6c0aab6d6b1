//! Concrete certification schemes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::cert::{Certificate, CertifyError, Value, Widths};
use crate::graph::{Graph, NodeId};
use crate::treedepth::{compute_treedepth_exact, is_coherent, is_valid_model, make_coherent, Model};

mod count;
mod depth2;
mod existential;
mod fo_treedepth;
mod kernel;
mod registry;
mod spanning_tree;
mod treedepth;

pub use count::CountScheme;
pub use depth2::{depth2_classify, profile_of, Depth2Scheme, Profile};
pub use existential::ExistentialFoScheme;
pub use fo_treedepth::{FoTreedepthScheme, KERNEL_PART_FIELDS};
pub use kernel::KernelScheme;
pub use registry::{build_scheme, SchemeParams, SchemeSpecError, SCHEME_NAMES};
pub use spanning_tree::{RootPredicate, SpanningTreeScheme};
pub use treedepth::TreedepthScheme;

/// One node's piece of a rooted spanning tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct TreeEntry {
    pub parent: NodeId,
    pub root: NodeId,
    pub dist: u64,
}

pub(crate) fn tree_cert(e: TreeEntry, w: Widths) -> Certificate {
    Certificate::new()
        .with("parent", Value::id(e.parent, w.id))
        .with("root", Value::id(e.root, w.id))
        .with("dist", Value::uint(e.dist, w.counter))
}

pub(crate) fn read_tree(c: &Certificate) -> Option<TreeEntry> {
    Some(TreeEntry { parent: c.id("parent")?, root: c.id("root")?, dist: c.uint("dist")? })
}

/// The local spanning-tree rules at `me`, given the tree entries of the
/// neighbors that belong to the same tree: everyone agrees on the root, the
/// root points to itself at distance 0, and any other node points to a
/// neighbor one step closer.
pub(crate) fn check_tree(me: NodeId, own: TreeEntry, others: &[(NodeId, TreeEntry)]) -> bool {
    if others.iter().any(|(_, e)| e.root != own.root) {
        return false;
    }
    if own.dist == 0 {
        return own.parent == me && own.root == me;
    }
    own.parent != me
        && others.iter().any(|(u, e)| *u == own.parent && e.dist.checked_add(1) == Some(own.dist))
}

/// BFS tree of the subgraph induced by `members`, from `root`. Parents are
/// the smallest-id neighbor one level up. Members unreachable from `root`
/// are left out.
pub(crate) fn bfs_tree(g: &Graph, members: &BTreeSet<NodeId>, root: NodeId) -> BTreeMap<NodeId, TreeEntry> {
    let mut out = BTreeMap::new();
    out.insert(root, TreeEntry { parent: root, root, dist: 0 });
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let d = out[&v].dist;
        for u in g.neighbor_ids(v) {
            if members.contains(&u) && !out.contains_key(&u) {
                out.insert(u, TreeEntry { parent: v, root, dist: d + 1 });
                queue.push_back(u);
            }
        }
    }
    out
}

pub(crate) fn all_nodes(g: &Graph) -> BTreeSet<NodeId> {
    g.ids().iter().copied().collect()
}

pub(crate) fn no(msg: impl Into<String>) -> CertifyError {
    CertifyError::NoInstance(msg.into())
}

/// A coherent model of height at most `t`: the supplied one (made coherent
/// if needed) or one from the exact solver.
pub(crate) fn coherent_model(g: &Graph, model: Option<&Model>, t: usize) -> Result<Model, CertifyError> {
    let m = match model {
        Some(m) => {
            if !is_valid_model(g, m, t).map_err(|e| no(e.to_string()))? {
                return Err(no(format!("supplied model is not a valid model of height at most {t}")));
            }
            if is_coherent(g, m) {
                m.clone()
            } else {
                make_coherent(g, m).map_err(|e| no(e.to_string()))?
            }
        }
        None => {
            let (td, m) = compute_treedepth_exact(g).map_err(|e| no(e.to_string()))?;
            if td > t {
                return Err(no(format!("treedepth is {td}, more than {t}")));
            }
            m
        }
    };
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_rules() {
        let e = |p, r, d| TreeEntry { parent: NodeId(p), root: NodeId(r), dist: d };
        assert!(check_tree(NodeId(1), e(1, 1, 0), &[(NodeId(2), e(1, 1, 1))]));
        assert!(check_tree(NodeId(2), e(1, 1, 1), &[(NodeId(1), e(1, 1, 0)), (NodeId(3), e(2, 1, 2))]));
        assert!(!check_tree(NodeId(3), e(2, 1, 5), &[(NodeId(2), e(1, 1, 1))]));
        assert!(!check_tree(NodeId(3), e(3, 1, 0), &[]));
        assert!(!check_tree(NodeId(2), e(1, 1, 1), &[(NodeId(1), e(1, 9, 0))]));
    }

    #[test]
    fn bfs_on_path() {
        let g = Graph::path(4);
        let t = bfs_tree(&g, &all_nodes(&g), NodeId(2));
        assert_eq!(t[&NodeId(4)], TreeEntry { parent: NodeId(3), root: NodeId(2), dist: 2 });
        let part: BTreeSet<NodeId> = [1, 3, 4].into_iter().map(NodeId).collect();
        assert_eq!(bfs_tree(&g, &part, NodeId(3)).len(), 2);
    }
}
