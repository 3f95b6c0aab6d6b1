use std::collections::{BTreeMap, BTreeSet};

use super::treedepth::{certs_from_model, verify_treedepth};
use super::{coherent_model, no};
use crate::cert::{CertMap, CertifyError, Certificate, LocalView, Scheme, Value, Widths};
use crate::graph::{bits_for, Graph, NodeId};
use crate::kernel::{k_reduce, AncestorVector, Reduction, TypeId, TypeKey};
use crate::treedepth::Model;

/// Certifies that the surviving vertices form a `k`-reduction of the graph
/// along a certified elimination tree of height at most `t`. On top of the
/// treedepth certificate every vertex carries, aligned with its ancestor
/// list, whether each ancestor is a pruned root and its end type, plus the
/// shared table of end types.
#[derive(Clone, Debug)]
pub struct KernelScheme {
    pub k: usize,
    pub t: usize,
}

/// The end types in use, numbered canonically (by depth, then code).
pub(crate) struct CanonicalTable {
    pub keys: Vec<TypeKey>,
    pub index: BTreeMap<TypeId, usize>,
}

impl CanonicalTable {
    pub fn new(r: &Reduction) -> CanonicalTable {
        let mut used: BTreeSet<TypeId> = BTreeSet::new();
        let mut stack: Vec<TypeId> = r.end_type.values().copied().collect();
        while let Some(t) = stack.pop() {
            if used.insert(t) {
                stack.extend(r.types.key(t).children.iter().copied());
            }
        }
        let mut order: Vec<(usize, String, TypeId)> =
            used.into_iter().map(|t| (r.types.key(t).depth(), r.types.code(t).0, t)).collect();
        order.sort();
        let index: BTreeMap<TypeId, usize> = order.iter().enumerate().map(|(i, (_, _, t))| (*t, i)).collect();
        let keys = order
            .iter()
            .map(|(_, _, t)| {
                let key = r.types.key(*t);
                let mut children: Vec<usize> = key.children.iter().map(|c| index[c]).collect();
                children.sort_unstable();
                TypeKey { vector: key.vector.clone(), children }
            })
            .collect();
        CanonicalTable { keys, index }
    }

    pub fn width(&self) -> u32 {
        bits_for(self.keys.len() as u64)
    }

    pub fn to_certs(&self, k: usize, w: Widths) -> Vec<Certificate> {
        let tw = self.width();
        self.keys
            .iter()
            .map(|key| {
                let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
                for &c in &key.children {
                    *counts.entry(c).or_default() += 1;
                }
                Certificate::new()
                    .with("vec", Value::Bits { bits: key.vector.0.clone(), len_width: w.depth })
                    .with("kids", Value::List { items: counts.keys().map(|&c| c as u64).collect(), item_width: tw, len_width: tw })
                    .with("cnt", Value::List { items: counts.values().copied().collect(), item_width: bits_for(k as u64), len_width: 0 })
            })
            .collect()
    }
}

/// A type table read back from a certificate.
pub(crate) fn parse_table(entries: &[Certificate], k: usize) -> Option<Vec<TypeKey>> {
    let mut keys = Vec::with_capacity(entries.len());
    for e in entries {
        let (vector, kids, cnt) = (e.bits("vec")?, e.list("kids")?, e.list("cnt")?);
        if kids.len() != cnt.len() || kids.windows(2).any(|p| p[0] >= p[1]) {
            return None;
        }
        let mut children = Vec::new();
        for (&c, &n) in kids.iter().zip(cnt) {
            if n == 0 || n > k as u64 || c as usize >= entries.len() {
                return None;
            }
            children.extend(std::iter::repeat_n(c as usize, n as usize));
        }
        keys.push(TypeKey { vector: AncestorVector(vector.to_vec()), children });
    }
    let ok = keys.iter().all(|key| key.children.iter().all(|&c| keys[c].depth() == key.depth() + 1));
    ok.then_some(keys)
}

impl KernelScheme {
    pub fn reduce(&self, g: &Graph, model: Option<&Model>) -> Result<Reduction, CertifyError> {
        let m = coherent_model(g, model, self.t)?;
        k_reduce(g, &m, self.k).map_err(|e| no(e.to_string()))
    }

    pub(crate) fn certs_for(&self, r: &Reduction) -> (CertMap, CanonicalTable) {
        let w = Widths::new(&r.graph, self.t);
        let table = CanonicalTable::new(r);
        let tw = table.width();
        let entries = table.to_certs(self.k, w);
        let mut certs = certs_from_model(&r.graph, &r.model, w);
        for (v, c) in certs.iter_mut() {
            let anc = r.model.ancestors(*v);
            c.push("pruned", Value::Bits { bits: anc.iter().map(|a| r.pruned.contains(a)).collect(), len_width: 0 });
            c.push(
                "types",
                Value::List {
                    items: anc.iter().map(|a| table.index[&r.end_type[a]] as u64).collect(),
                    item_width: tw,
                    len_width: 0,
                },
            );
            c.push("table", Value::SubList { items: entries.clone(), len_width: tw });
        }
        (certs, table)
    }
}

/// Kernel fields of one certificate.
pub(crate) struct KernelFields<'a> {
    pub list: &'a [u64],
    pub pruned: &'a [bool],
    pub types: &'a [u64],
    pub table: &'a [Certificate],
}

pub(crate) fn read_kernel(c: &Certificate) -> Option<KernelFields<'_>> {
    let f = KernelFields {
        list: c.list("anc")?,
        pruned: c.bits("pruned")?,
        types: c.list("types")?,
        table: c.sub_list("table")?,
    };
    (f.pruned.len() == f.list.len() && f.types.len() == f.list.len()).then_some(f)
}

/// Kernel verification at one node. Returns the parsed table on success.
pub(crate) fn verify_kernel(view: &LocalView, k: usize, t: usize) -> Option<Vec<TypeKey>> {
    if !verify_treedepth(view, t) {
        return None;
    }
    let me = read_kernel(view.cert)?;
    let table = parse_table(me.table, k)?;
    let d = me.list.len() - 1;
    for (i, &ty) in me.types.iter().enumerate() {
        if table.get(ty as usize)?.depth() != d - i {
            return None;
        }
    }
    if *me.pruned.last()? {
        return None;
    }
    // (a) my end type matches my adjacency to my ancestors
    let own = &table[me.types[0] as usize];
    let actual: Vec<bool> = (0..d).map(|j| view.is_neighbor(NodeId(me.list[d - j]))).collect();
    if own.vector.0 != actual {
        return None;
    }
    // (e) neighbors agree on the shared part of the lists and on the table;
    // (b) deeper neighbors report on my children
    let mut children: BTreeMap<u64, (bool, u64)> = BTreeMap::new();
    for (_, c) in &view.neighbors {
        let u = read_kernel(c)?;
        if u.table != me.table {
            return None;
        }
        let m = u.list.len().min(me.list.len());
        let (a, b) = (me.list.len() - m, u.list.len() - m);
        if me.pruned[a..] != u.pruned[b..] || me.types[a..] != u.types[b..] {
            return None;
        }
        if u.list.len() > me.list.len() {
            let at = b - 1;
            let report = (u.pruned[at], u.types[at]);
            if *children.entry(u.list[at]).or_insert(report) != report {
                return None;
            }
        }
    }
    // (c) at most k unpruned children per type, exactly k where one was pruned
    let mut kept: BTreeMap<usize, usize> = BTreeMap::new();
    for &(pruned, ty) in children.values() {
        if !pruned {
            *kept.entry(ty as usize).or_default() += 1;
        }
    }
    if kept.values().any(|&c| c > k) {
        return None;
    }
    if children.values().any(|&(pruned, ty)| pruned && kept.get(&(ty as usize)).copied().unwrap_or(0) != k) {
        return None;
    }
    // (d) my end type lists exactly my unpruned children's end types
    let mut mine: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &own.children {
        *mine.entry(c).or_default() += 1;
    }
    (mine == kept).then_some(table)
}

impl Scheme for KernelScheme {
    fn name(&self) -> String {
        format!("kernel[k={},t={}]", self.k, self.t)
    }

    fn prove(&self, g: &Graph, model: Option<&Model>) -> Result<CertMap, CertifyError> {
        let r = self.reduce(g, model)?;
        Ok(self.certs_for(&r).0)
    }

    fn verify(&self, view: &LocalView) -> bool {
        verify_kernel(view, self.k, self.t).is_some()
    }

    fn strategies(&self) -> Vec<&'static str> {
        vec!["over-prune", "under-prune", "forge-type"]
    }

    /// Cheating on a yes-instance of the treedepth part: `over-prune` flags
    /// one more child of some class as pruned, `under-prune` unflags a pruned
    /// root, `forge-type` relabels a vertex with another type of its depth.
    /// Each is propagated consistently to the whole subtree.
    fn cheat(&self, g: &Graph, strategy: &str, _seed: u64) -> Vec<CertMap> {
        let Ok(r) = self.reduce(g, None) else { return Vec::new() };
        let (honest, table) = self.certs_for(&r);
        let mut out = Vec::new();
        let set = |certs: &mut CertMap, target: NodeId, field: &str, f: &dyn Fn(&mut Value, usize)| {
            let dt = r.model.depth(target);
            for x in r.model.subtree(target) {
                let pos = r.model.depth(x) - dt;
                if let Some(v) = certs.get_mut(&x).and_then(|c| c.get_mut(field)) {
                    f(v, pos);
                }
            }
        };
        for v in r.model.nodes().filter(|v| r.model.parent(*v).is_some()) {
            let mut c = honest.clone();
            match strategy {
                "over-prune" if !r.pruned.contains(&v) && !r.deleted.contains(&v) => {
                    set(&mut c, v, "pruned", &|val, pos| {
                        if let Value::Bits { bits, .. } = val {
                            bits[pos] = true;
                        }
                    });
                }
                "under-prune" if r.pruned.contains(&v) => {
                    set(&mut c, v, "pruned", &|val, pos| {
                        if let Value::Bits { bits, .. } = val {
                            bits[pos] = false;
                        }
                    });
                }
                "forge-type" => {
                    let cur = table.index[&r.end_type[&v]];
                    let d = r.model.depth(v);
                    let Some(other) = (0..table.keys.len()).find(|&i| i != cur && table.keys[i].depth() == d) else {
                        continue;
                    };
                    set(&mut c, v, "types", &|val, pos| {
                        if let Value::List { items, .. } = val {
                            items[pos] = other as u64;
                        }
                    });
                }
                _ => continue,
            }
            out.push(c);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::{adversarial_prover, run_verification};

    fn star_model(leaves: usize) -> Model {
        Model::from_parents((1..=leaves as u64 + 1).map(|i| (NodeId(i), NodeId(1))).collect()).unwrap()
    }

    #[test]
    fn star_k2() {
        let g = Graph::star(5);
        let s = KernelScheme { k: 2, t: 1 };
        let c = s.prove(&g, Some(&star_model(5))).unwrap();
        let flagged: Vec<u64> =
            c.iter().filter(|(_, x)| x.bits("pruned").unwrap()[0]).map(|(v, _)| v.0).collect();
        assert_eq!(flagged, vec![4, 5, 6]);
        assert!(run_verification(&g, &c, &s).unwrap().accepted);

        let mut bad = c.clone();
        if let Some(Value::List { items, .. }) = bad.get_mut(&NodeId(3)).unwrap().get_mut("types") {
            items[0] = 1 - items[0];
        }
        assert!(!run_verification(&g, &bad, &s).unwrap().accepted);
    }

    #[test]
    fn reduced_graph_has_no_flags() {
        let g = Graph::path(7);
        let s = KernelScheme { k: 2, t: 2 };
        let c = s.prove(&g, Some(&crate::treedepth::balanced_path_model(7))).unwrap();
        assert!(c.values().all(|x| x.bits("pruned").unwrap().iter().all(|b| !b)));
        assert!(run_verification(&g, &c, &s).unwrap().accepted);
    }

    #[test]
    fn attacks_fail() {
        let g = crate::generate::random_bounded_treedepth_graph(2, 12, 5).unwrap().0;
        for k in 1..=2 {
            let s = KernelScheme { k, t: 3 };
            let honest = s.prove(&g, None).unwrap();
            assert!(run_verification(&g, &honest, &s).unwrap().accepted);
            for (name, c) in adversarial_prover(&g, &s, &s.strategies(), 0) {
                assert!(!run_verification(&g, &c, &s).unwrap().accepted, "{name} escaped");
            }
        }
        let star = Graph::star(6);
        let s = KernelScheme { k: 2, t: 1 };
        let attacks = adversarial_prover(&star, &s, &s.strategies(), 0);
        assert!(attacks.iter().any(|(n, _)| n == "under-prune"));
        for (name, c) in attacks {
            assert!(!run_verification(&star, &c, &s).unwrap().accepted, "{name} escaped");
        }
    }
}
