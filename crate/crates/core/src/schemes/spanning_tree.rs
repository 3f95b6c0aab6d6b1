use rand::Rng;

use super::{all_nodes, bfs_tree, check_tree, no, read_tree, tree_cert, TreeEntry};
use crate::cert::{CertMap, CertifyError, LocalView, Scheme, Widths};
use crate::generate::rng_for;
use crate::graph::{Graph, NodeId};
use crate::treedepth::Model;

/// Which vertex may be the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootPredicate {
    Any,
    Id(NodeId),
}

/// Certifies a rooted spanning tree with `(parent, root, dist)` at every node.
#[derive(Clone, Debug)]
pub struct SpanningTreeScheme {
    pub root: RootPredicate,
}

impl Default for SpanningTreeScheme {
    fn default() -> Self {
        SpanningTreeScheme { root: RootPredicate::Any }
    }
}

impl SpanningTreeScheme {
    pub fn rooted_at(id: NodeId) -> Self {
        SpanningTreeScheme { root: RootPredicate::Id(id) }
    }
}

impl Scheme for SpanningTreeScheme {
    fn name(&self) -> String {
        "st".into()
    }

    fn prove(&self, g: &Graph, _model: Option<&Model>) -> Result<CertMap, CertifyError> {
        let root = match self.root {
            RootPredicate::Any => g.id(0),
            RootPredicate::Id(r) if g.contains(r) => r,
            RootPredicate::Id(r) => return Err(no(format!("no vertex {r}"))),
        };
        let w = Widths::new(g, 0);
        let tree = bfs_tree(g, &all_nodes(g), root);
        if tree.len() != g.len() {
            return Err(no("graph is disconnected"));
        }
        Ok(tree.into_iter().map(|(v, e)| (v, tree_cert(e, w))).collect())
    }

    fn verify(&self, view: &LocalView) -> bool {
        let Some(own) = read_tree(view.cert) else { return false };
        let mut others = Vec::with_capacity(view.degree());
        for (u, c) in &view.neighbors {
            match read_tree(c) {
                Some(e) => others.push((*u, e)),
                None => return false,
            }
        }
        if let RootPredicate::Id(r) = self.root {
            if own.root != r {
                return false;
            }
        }
        check_tree(view.id, own, &others)
    }

    fn strategies(&self) -> Vec<&'static str> {
        vec!["distance-shift", "cycle"]
    }

    /// Fake trees for graphs where the certified root does not exist:
    /// `distance-shift` roots the tree at a real vertex and relabels it with
    /// the claimed root id; `cycle` closes the tree into a parent cycle with
    /// no root at all.
    fn cheat(&self, g: &Graph, strategy: &str, seed: u64) -> Vec<CertMap> {
        let w = Widths::new(g, 0);
        let claimed = match self.root {
            RootPredicate::Id(r) => r,
            RootPredicate::Any => NodeId(g.id_bound() + 1),
        };
        let mut rng = rng_for(seed);
        let mut out = Vec::new();
        for start in g.ids().iter().copied().take(8) {
            let tree = bfs_tree(g, &all_nodes(g), start);
            let shift = rng.gen_range(0..3u64);
            let certs: CertMap = match strategy {
                "distance-shift" => tree
                    .iter()
                    .map(|(&v, e)| {
                        let parent = if v == start { v } else { e.parent };
                        (v, tree_cert(TreeEntry { parent, root: claimed, dist: e.dist + shift }, w))
                    })
                    .collect(),
                "cycle" => tree
                    .iter()
                    .map(|(&v, e)| {
                        // the root adopts a neighbor as parent, creating a cycle
                        let parent = if v == start { g.neighbor_ids(v).next().unwrap_or(v) } else { e.parent };
                        (v, tree_cert(TreeEntry { parent, root: claimed, dist: e.dist + 1 + shift }, w))
                    })
                    .collect(),
                _ => return Vec::new(),
            };
            out.push(certs);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::{adversarial_prover, cert_size_bits, run_verification, Certificate};

    fn p3_certs(dist3: u64) -> CertMap {
        let w = Widths::new(&Graph::path(3), 0);
        let e = |p, d| TreeEntry { parent: NodeId(p), root: NodeId(1), dist: d };
        [(1, e(1, 0)), (2, e(1, 1)), (3, e(2, dist3))].into_iter().map(|(v, x)| (NodeId(v), tree_cert(x, w))).collect()
    }

    #[test]
    fn hand_examples() {
        let g = Graph::path(3);
        let s = SpanningTreeScheme::default();
        assert!(run_verification(&g, &p3_certs(2), &s).unwrap().accepted);
        let v = run_verification(&g, &p3_certs(5), &s).unwrap();
        assert_eq!(v.rejecting.into_iter().collect::<Vec<_>>(), vec![NodeId(3)]);
        let empty: CertMap = g.ids().iter().map(|&v| (v, Certificate::new())).collect();
        assert!(!run_verification(&g, &empty, &s).unwrap().accepted);
        let mut tampered = p3_certs(2);
        tampered.insert(NodeId(2), tree_cert(TreeEntry { parent: NodeId(1), root: NodeId(3), dist: 1 }, Widths::new(&g, 0)));
        assert!(!run_verification(&g, &tampered, &s).unwrap().rejecting.is_empty());
    }

    #[test]
    fn single_vertex() {
        let g = Graph::path(1);
        let c = SpanningTreeScheme::default().prove(&g, None).unwrap();
        assert_eq!(c[&NodeId(1)].uint("dist"), Some(0));
        assert!(run_verification(&g, &c, &SpanningTreeScheme::default()).unwrap().accepted);
    }

    #[test]
    fn p7_size_is_fifteen_bits() {
        let g = Graph::path(7);
        let c = SpanningTreeScheme::default().prove(&g, None).unwrap();
        assert_eq!(cert_size_bits(&c).max_bits, 15);
        assert_eq!(cert_size_bits(&c).total_bits, 105);
    }

    #[test]
    fn missing_root_is_never_accepted() {
        let g = Graph::cycle(6);
        let s = SpanningTreeScheme::rooted_at(NodeId(40));
        assert!(s.prove(&g, None).is_err());
        let attacks = adversarial_prover(&g, &s, &s.strategies(), 3);
        assert!(!attacks.is_empty());
        for (_, c) in attacks {
            assert!(!run_verification(&g, &c, &s).unwrap().accepted);
        }
        assert!(adversarial_prover(&g, &s, &[], 3).is_empty());
    }
}
