use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{all_nodes, bfs_tree, check_tree, no, read_tree, tree_cert};
use crate::cert::{CertMap, CertifyError, Certificate, LocalView, Scheme, Value, Widths};
use crate::generate::rng_for;
use crate::graph::{bits_for, Graph, NodeId};
use crate::logic::{evaluate_with, DenseStructure, Formula, LogicError, Sentence, Var};
use crate::treedepth::Model;

/// Certifies a sentence whose prenex form is purely existential: the
/// witnesses, their adjacency matrix, and one spanning tree per witness
/// pointing to it.
#[derive(Clone, Debug)]
pub struct ExistentialFoScheme {
    sentence: Sentence,
    vars: Vec<Var>,
    matrix: Formula,
}

impl ExistentialFoScheme {
    pub fn new(sentence: &Sentence) -> Result<Self, LogicError> {
        if !sentence.is_existential() {
            return Err(LogicError::NotExistential);
        }
        let (prefix, matrix) = sentence.formula().prenex_parts();
        Ok(ExistentialFoScheme { sentence: sentence.clone(), vars: prefix.into_iter().map(|(_, v)| v).collect(), matrix })
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Lexicographically smallest witness tuple (by identifier).
    pub fn witnesses(&self, g: &Graph) -> Option<Vec<NodeId>> {
        let k = self.arity();
        let n = g.len();
        let mut idx = vec![0usize; k];
        if n == 0 {
            return None;
        }
        loop {
            let assignment: BTreeMap<Var, usize> = self.vars.iter().cloned().zip(idx.iter().copied()).collect();
            if evaluate_with(g, &self.matrix, &assignment).expect("prenex matrix only uses prefix variables") {
                return Some(idx.iter().map(|&i| g.id(i)).collect());
            }
            let mut pos = k;
            loop {
                if pos == 0 {
                    return None;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    fn certs_for(&self, g: &Graph, ids: &[NodeId], matrix: &[bool]) -> CertMap {
        let w = Widths::new(g, 0);
        let k = ids.len();
        let len_width = bits_for(k as u64);
        let trees: Vec<_> = ids.iter().map(|&r| bfs_tree(g, &all_nodes(g), r)).collect();
        g.ids()
            .iter()
            .map(|&v| {
                let c = Certificate::new()
                    .with("wit", Value::List { items: ids.iter().map(|x| x.0).collect(), item_width: w.id, len_width })
                    .with("adj", Value::Bits { bits: matrix.to_vec(), len_width: 0 })
                    .with(
                        "trees",
                        Value::SubList { items: trees.iter().map(|t| tree_cert(t[&v], w)).collect(), len_width },
                    );
                (v, c)
            })
            .collect()
    }

    /// Evaluates the matrix on witnesses whose pairwise adjacency is `adj`.
    fn holds(&self, ids: &[u64], adj: &[bool]) -> bool {
        let k = ids.len();
        // witnesses with equal ids are one element
        let rep: Vec<usize> = (0..k).map(|i| ids.iter().position(|&x| x == ids[i]).expect("present")).collect();
        let mut s = DenseStructure::new(k);
        for i in 0..k {
            for j in 0..k {
                if rep[i] == i && rep[j] == j && adj[i * k + j] {
                    s.set(i, j, true);
                }
            }
        }
        let assignment: BTreeMap<Var, usize> = self.vars.iter().cloned().zip(rep).collect();
        evaluate_with(&s, &self.matrix, &assignment).unwrap_or(false)
    }
}

impl Scheme for ExistentialFoScheme {
    fn name(&self) -> String {
        format!("efo[{}]", self.sentence.formula())
    }

    fn prove(&self, g: &Graph, _model: Option<&Model>) -> Result<CertMap, CertifyError> {
        let ids = self.witnesses(g).ok_or_else(|| no("sentence is false on this graph"))?;
        let k = ids.len();
        let matrix: Vec<bool> = (0..k * k).map(|x| g.adjacent_ids(ids[x / k], ids[x % k])).collect();
        Ok(self.certs_for(g, &ids, &matrix))
    }

    fn verify(&self, view: &LocalView) -> bool {
        let k = self.arity();
        let c = view.cert;
        let (Some(ids), Some(adj), Some(trees)) = (c.list("wit"), c.bits("adj"), c.sub_list("trees")) else {
            return false;
        };
        if ids.len() != k || adj.len() != k * k || trees.len() != k {
            return false;
        }
        for (_, u) in &view.neighbors {
            if u.list("wit") != Some(ids) || u.bits("adj") != Some(adj) {
                return false;
            }
        }
        for i in 0..k {
            if adj[i * k + i] {
                return false;
            }
            for j in 0..k {
                if adj[i * k + j] != adj[j * k + i] {
                    return false;
                }
                if ids[i] == ids[j] && (0..k).any(|l| adj[i * k + l] != adj[j * k + l]) {
                    return false;
                }
            }
        }
        for (i, t) in trees.iter().enumerate() {
            let Some(own) = read_tree(t) else { return false };
            if own.root.0 != ids[i] {
                return false;
            }
            let mut others = Vec::with_capacity(view.degree());
            for (u, cu) in &view.neighbors {
                match cu.sub_list("trees").and_then(|ts| ts.get(i)).and_then(read_tree) {
                    Some(e) => others.push((*u, e)),
                    None => return false,
                }
            }
            if !check_tree(view.id, own, &others) {
                return false;
            }
        }
        // a witness vouches for its own row
        for i in (0..k).filter(|&i| ids[i] == view.id.0) {
            for j in 0..k {
                if adj[i * k + j] != view.is_neighbor(NodeId(ids[j])) {
                    return false;
                }
            }
        }
        self.holds(ids, adj)
    }

    fn strategies(&self) -> Vec<&'static str> {
        vec!["fake-matrix", "random-witnesses"]
    }

    /// `fake-matrix`: real witness candidates with a matrix that satisfies the
    /// sentence; `random-witnesses`: random tuples with a satisfying matrix
    /// (or an honest one if none satisfies).
    fn cheat(&self, g: &Graph, strategy: &str, seed: u64) -> Vec<CertMap> {
        let k = self.arity();
        let mut rng = rng_for(seed);
        let satisfying: Vec<Vec<bool>> = (0u64..1 << (k * k).min(16))
            .map(|mask| (0..k * k).map(|b| (mask >> b) & 1 == 1).collect::<Vec<bool>>())
            .filter(|m| (0..k).all(|i| !m[i * k + i] && (0..k).all(|j| m[i * k + j] == m[j * k + i])))
            .filter(|m| self.holds(&(0..k as u64).collect::<Vec<_>>(), m))
            .collect();
        let mut out = Vec::new();
        for _ in 0..16 {
            let ids: Vec<NodeId> = (0..k).map(|_| *g.ids().choose(&mut rng).expect("nonempty graph")).collect();
            let matrix = match strategy {
                "fake-matrix" if !satisfying.is_empty() => satisfying[rng.gen_range(0..satisfying.len())].clone(),
                "random-witnesses" => {
                    (0..k * k).map(|x| g.adjacent_ids(ids[x / k], ids[x % k])).collect()
                }
                _ => return out,
            };
            out.push(self.certs_for(g, &ids, &matrix));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::{adversarial_prover, cert_size_bits, run_verification};
    use crate::logic::corpus;

    fn triangle() -> ExistentialFoScheme {
        ExistentialFoScheme::new(&Sentence::parse(corpus::TRIANGLE).unwrap()).unwrap()
    }

    #[test]
    fn triangle_on_k3_and_c5() {
        let s = triangle();
        let g = Graph::complete(3);
        let c = s.prove(&g, None).unwrap();
        assert!(run_verification(&g, &c, &s).unwrap().accepted);
        let w = g.id_width() as usize;
        // ids with length prefix, the matrix, and three tree fragments
        assert_eq!(cert_size_bits(&c).max_bits, (2 + 3 * w) + 9 + (2 + 3 * (2 * w + 2)));
        let c5 = Graph::cycle(5);
        assert!(s.prove(&c5, None).is_err());
        for (_, c) in adversarial_prover(&c5, &s, &s.strategies(), 1) {
            assert!(!run_verification(&c5, &c, &s).unwrap().accepted);
        }
    }

    #[test]
    fn single_witness() {
        let s = ExistentialFoScheme::new(&Sentence::parse("exists x x = x").unwrap()).unwrap();
        let g = Graph::path(4);
        let c = s.prove(&g, None).unwrap();
        assert_eq!(c[&NodeId(3)].sub_list("trees").unwrap().len(), 1);
        assert!(run_verification(&g, &c, &s).unwrap().accepted);
    }

    #[test]
    fn smallest_witnesses() {
        let s = triangle();
        let g = Graph::from_index_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (2, 4)]).unwrap();
        assert_eq!(s.witnesses(&g).unwrap(), vec![NodeId(3), NodeId(4), NodeId(5)]);
        let repeat = ExistentialFoScheme::new(&Sentence::parse("exists x exists y x = y").unwrap()).unwrap();
        let c = repeat.prove(&g, None).unwrap();
        assert!(run_verification(&g, &c, &repeat).unwrap().accepted);
    }

    #[test]
    fn rejects_non_existential() {
        assert!(ExistentialFoScheme::new(&Sentence::parse(corpus::CLIQUE).unwrap()).is_err());
        let s = Sentence::parse("!forall x !(x = x)").unwrap();
        assert_eq!(ExistentialFoScheme::new(&s).unwrap().arity(), 1);
    }
}
