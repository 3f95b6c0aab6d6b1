use std::collections::BTreeMap;

use super::kernel::{read_kernel, verify_kernel, KernelScheme};
use super::no;
use crate::cert::{CertMap, CertifyError, Certificate, LocalView, Scheme, Value};
use crate::graph::{bits_for, Graph, NodeId};
use crate::kernel::{expand_type, ExpandedType, TypeKey};
use crate::logic::{Sentence, Structure};
use crate::treedepth::Model;

/// Largest kernel a verifier is willing to unfold.
pub const MAX_KERNEL: usize = 4096;

/// Fields whose size depends only on the kernel, not on the graph.
pub const KERNEL_PART_FIELDS: [&str; 3] = ["table", "kdesc", "kidx"];

/// Certifies a first-order sentence on graphs of treedepth at most `t`: a
/// kernel certificate for `k` = quantifier depth, the kernel itself at every
/// vertex, and the kernel position of every surviving vertex. Every vertex
/// checks that the kernel is the one encoded by the certified root end type
/// and evaluates the sentence on it.
#[derive(Clone, Debug)]
pub struct FoTreedepthScheme {
    sentence: Sentence,
    kernel: KernelScheme,
}

impl FoTreedepthScheme {
    pub fn new(sentence: &Sentence, t: usize) -> Self {
        let k = sentence.quantifier_depth().max(1);
        FoTreedepthScheme { sentence: sentence.clone(), kernel: KernelScheme { k, t } }
    }

    pub fn k(&self) -> usize {
        self.kernel.k
    }

    fn describe(e: &ExpandedType) -> Certificate {
        let n = e.types.len();
        let kw = bits_for(n as u64);
        let tw = bits_for(e.types.iter().copied().max().map_or(0, |m| m as u64 + 1));
        let adj = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| e.graph.related(i, j)).collect();
        Certificate::new()
            .with("types", Value::List { items: e.types.iter().map(|&t| t as u64).collect(), item_width: tw, len_width: kw })
            .with(
                "parents",
                Value::List {
                    items: (0..n).map(|i| e.parent[i].unwrap_or(i) as u64).collect(),
                    item_width: kw,
                    len_width: 0,
                },
            )
            .with("adj", Value::Bits { bits: adj, len_width: 0 })
    }

    fn certs(&self, g: &Graph, model: Option<&Model>) -> Result<CertMap, CertifyError> {
        let r = self.kernel.reduce(g, model)?;
        let (mut certs, table) = self.kernel.certs_for(&r);
        let root = r.model.root();
        let e = expand_type(&table.keys, table.index[&r.end_type[&root]], MAX_KERNEL)
            .ok_or_else(|| no("kernel too large to broadcast"))?;
        let desc = Self::describe(&e);
        let kw = bits_for(e.types.len() as u64);
        // survivors in the same preorder as the expansion
        let mut position = BTreeMap::new();
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            position.insert(v, position.len());
            let mut kids: Vec<(usize, NodeId)> = r
                .model
                .children(v)
                .iter()
                .filter(|c| r.survives(**c))
                .map(|&c| (table.index[&r.end_type[&c]], c))
                .collect();
            kids.sort_unstable();
            stack.extend(kids.into_iter().rev().map(|(_, c)| c));
        }
        for (v, c) in certs.iter_mut() {
            c.push("kdesc", Value::Sub { cert: desc.clone() });
            let idx: Vec<u64> = position.get(v).map(|&p| p as u64).into_iter().collect();
            c.push("kidx", Value::List { items: idx, item_width: kw, len_width: 1 });
        }
        Ok(certs)
    }
}

fn index_of(c: &Certificate) -> Option<Option<usize>> {
    match c.list("kidx")? {
        [] => Some(None),
        [i] => Some(Some(*i as usize)),
        _ => None,
    }
}

/// Kernel part of a description: per-vertex types, parents, and upper-triangle adjacency.
fn matches(desc: &Certificate, e: &ExpandedType) -> bool {
    let n = e.types.len();
    let types: Vec<u64> = e.types.iter().map(|&t| t as u64).collect();
    let parents: Vec<u64> = (0..n).map(|i| e.parent[i].unwrap_or(i) as u64).collect();
    let adj: Vec<bool> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| e.graph.related(i, j)).collect();
    desc.list("types") == Some(&types[..]) && desc.list("parents") == Some(&parents[..]) && desc.bits("adj") == Some(&adj[..])
}

fn verify_fo(s: &FoTreedepthScheme, view: &LocalView) -> Option<bool> {
    let table: Vec<TypeKey> = verify_kernel(view, s.kernel.k, s.kernel.t)?;
    let me = read_kernel(view.cert)?;
    let desc = view.cert.sub("kdesc")?;
    if view.neighbors.iter().any(|(_, c)| c.sub("kdesc") != Some(desc)) {
        return None;
    }
    let e = expand_type(&table, *me.types.last()? as usize, MAX_KERNEL)?;
    if !matches(desc, &e) {
        return None;
    }
    let survives = |k: &super::kernel::KernelFields| k.pruned.iter().all(|p| !p);
    match (survives(&me), index_of(view.cert)?) {
        (false, None) => {}
        (true, Some(i)) => {
            if i >= e.types.len() {
                return None;
            }
            // my position and its ancestor chain carry my end types
            let mut at = Some(i);
            for &ty in me.types {
                let p = at?;
                if e.types[p] != ty as usize {
                    return None;
                }
                at = e.parent[p];
            }
            if at.is_some() {
                return None;
            }
            // my kernel row is my adjacency to surviving neighbors
            let mut seen = Vec::new();
            for (_, c) in &view.neighbors {
                let u = read_kernel(c)?;
                if survives(&u) {
                    let j = index_of(c)??;
                    if j >= e.types.len() || !e.graph.related(i, j) || seen.contains(&j) {
                        return None;
                    }
                    seen.push(j);
                }
            }
            if (0..e.types.len()).filter(|&j| e.graph.related(i, j)).count() != seen.len() {
                return None;
            }
        }
        _ => return None,
    }
    Some(s.sentence.evaluate(&e.graph))
}

impl Scheme for FoTreedepthScheme {
    fn name(&self) -> String {
        format!("fo-td[t={},k={}][{}]", self.kernel.t, self.kernel.k, self.sentence.formula())
    }

    fn prove(&self, g: &Graph, model: Option<&Model>) -> Result<CertMap, CertifyError> {
        if !self.sentence.evaluate(g) {
            return Err(no("sentence is false on this graph"));
        }
        self.certs(g, model)
    }

    fn verify(&self, view: &LocalView) -> bool {
        verify_fo(self, view).unwrap_or(false)
    }

    fn strategies(&self) -> Vec<&'static str> {
        vec!["honest-kernel", "fake-kernel"]
    }

    /// `honest-kernel`: the true certificates although the sentence is
    /// false. `fake-kernel`: the description of a small graph satisfying the
    /// sentence broadcast in place of the real one.
    fn cheat(&self, g: &Graph, strategy: &str, _seed: u64) -> Vec<CertMap> {
        let Ok(honest) = self.certs(g, None) else { return Vec::new() };
        match strategy {
            "honest-kernel" => vec![honest],
            "fake-kernel" => {
                let mut out = Vec::new();
                for h in crate::generate::connected_graphs(4) {
                    if !self.sentence.evaluate(&h) {
                        continue;
                    }
                    let Ok(fake) = self.certs(&h, None) else { continue };
                    let desc = fake.values().next().and_then(|c| c.sub("kdesc")).cloned().expect("nonempty");
                    let mut c = honest.clone();
                    for cert in c.values_mut() {
                        *cert.get_mut("kdesc").expect("present") = Value::Sub { cert: desc.clone() };
                    }
                    out.push(c);
                }
                out
            }
            _ => Vec::new(),
        }
    }
}
