use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{bfs_tree, check_tree, coherent_model, read_tree, tree_cert, TreeEntry};
use crate::cert::{CertMap, CertifyError, Certificate, LocalView, Scheme, Value, Widths};
use crate::generate::rng_for;
use crate::graph::{bits_for, Graph, NodeId};
use crate::treedepth::{compute_treedepth_exact, Model, EXACT_SOLVER_LIMIT};

/// Certifies treedepth at most `t`: every vertex gets the list of its
/// ancestors (itself first, the root last) and, for each ancestor `a` other
/// than the root, its fragment of a spanning tree of the subtree of `a`
/// rooted at the exit vertex of `a`, tagged with the depth of `a`.
#[derive(Clone, Debug)]
pub struct TreedepthScheme {
    pub t: usize,
}

/// Builds ancestor lists and fragments from any rooted tree on the vertices.
/// For a coherent valid model this is the honest certificate. Otherwise the
/// exit is the smallest subtree vertex adjacent to the parent (or just the
/// smallest one), and disconnected parts get their own BFS roots.
pub(crate) fn certs_from_model(g: &Graph, m: &Model, w: Widths) -> CertMap {
    let mut trees: BTreeMap<NodeId, BTreeMap<NodeId, TreeEntry>> = BTreeMap::new();
    for a in m.nodes() {
        let Some(p) = m.parent(a) else { continue };
        let members: BTreeSet<NodeId> = m.subtree(a).into_iter().collect();
        let exit = members.iter().copied().find(|&u| g.adjacent_ids(u, p)).unwrap_or(a.min(*members.first().expect("contains a")));
        let mut tree = bfs_tree(g, &members, exit);
        while let Some(&start) = members.iter().find(|u| !tree.contains_key(u)) {
            let rest: BTreeSet<NodeId> = members.iter().copied().filter(|u| !tree.contains_key(u)).collect();
            tree.extend(bfs_tree(g, &rest, start));
        }
        trees.insert(a, tree);
    }
    m.nodes()
        .map(|v| {
            let anc = m.ancestors(v);
            let d = anc.len() - 1;
            let frags = (1..=d)
                .map(|j| {
                    let e = trees[&anc[d - j]][&v];
                    let mut c = Certificate::new().with("tag", Value::uint(j as u64, w.depth));
                    c.fields.extend(tree_cert(e, w).fields);
                    c
                })
                .collect();
            let c = Certificate::new()
                .with("anc", Value::List { items: anc.iter().map(|x| x.0).collect(), item_width: w.id, len_width: w.depth })
                .with("frags", Value::SubList { items: frags, len_width: w.depth });
            (v, c)
        })
        .collect()
}

fn is_proper_suffix(short: &[u64], long: &[u64]) -> bool {
    short.len() < long.len() && long.ends_with(short)
}

/// The treedepth verification at one node, on the `anc` and `frags` fields
/// of its certificate and its neighbors' certificates.
pub(crate) fn verify_treedepth(view: &LocalView, t: usize) -> bool {
    let Some(list) = view.cert.list("anc") else { return false };
    let Some(frags) = view.cert.sub_list("frags") else { return false };
    // step 1: the list starts with me, is short enough, and ends at the shared root
    let Some(&root) = list.last() else { return false };
    let d = list.len() - 1;
    if list[0] != view.id.0 || d > t {
        return false;
    }
    let distinct: BTreeSet<u64> = list.iter().copied().collect();
    if distinct.len() != list.len() {
        return false;
    }
    let mut lists = Vec::with_capacity(view.degree());
    for (u, c) in &view.neighbors {
        let Some(lu) = c.list("anc") else { return false };
        // step 2: neighbors are strict ancestors or strict descendants
        if lu.last() != Some(&root) || !(is_proper_suffix(lu, list) || is_proper_suffix(list, lu)) {
            return false;
        }
        lists.push((*u, lu, c));
    }
    // step 3: one tree per non-root ancestor, tagged by its depth
    if frags.len() != d {
        return false;
    }
    let mut own = Vec::with_capacity(d);
    for (i, f) in frags.iter().enumerate() {
        match (f.uint("tag"), read_tree(f)) {
            (Some(tag), Some(e)) if tag == i as u64 + 1 => own.push(e),
            _ => return false,
        }
    }
    // step 4: tree `j` is locally correct among the vertices below the
    // depth-j ancestor, and its root touches that ancestor's parent
    for j in 1..=d {
        let suffix = &list[d - j..];
        let mut others = Vec::new();
        for (u, lu, c) in &lists {
            if lu.ends_with(suffix) {
                match c.sub_list("frags").and_then(|fs| fs.get(j - 1)).and_then(read_tree) {
                    Some(e) => others.push((*u, e)),
                    None => return false,
                }
            }
        }
        let me = own[j - 1];
        if !check_tree(view.id, me, &others) {
            return false;
        }
        if me.dist == 0 && !lists.iter().any(|(_, lu, _)| *lu == &list[d - j + 1..]) {
            return false;
        }
    }
    true
}

impl TreedepthScheme {
    pub fn widths(&self, g: &Graph) -> Widths {
        Widths::new(g, self.t)
    }

    /// Widths wide enough for lists of `len` entries.
    fn cheat_widths(&self, g: &Graph, len: usize) -> Widths {
        let mut w = self.widths(g);
        w.depth = w.depth.max(bits_for(len as u64));
        w
    }

    /// An optimal coherent model, if the graph is small enough.
    fn optimal_model(g: &Graph) -> Option<Model> {
        (g.len() <= EXACT_SOLVER_LIMIT).then(|| compute_treedepth_exact(g).ok().map(|(_, m)| m)).flatten()
    }

    fn random_model(g: &Graph, t: usize, rng: &mut impl Rng) -> Model {
        let mut order = g.ids().to_vec();
        order.shuffle(rng);
        let mut parents = BTreeMap::new();
        let mut depth = BTreeMap::new();
        parents.insert(order[0], order[0]);
        depth.insert(order[0], 0usize);
        for (i, &v) in order.iter().enumerate().skip(1) {
            let options: Vec<NodeId> = order[..i].iter().copied().filter(|u| depth[u] < t).collect();
            let p = *options.choose(rng).unwrap_or(&order[0]);
            parents.insert(v, p);
            depth.insert(v, depth[&p] + 1);
        }
        Model::from_parents(parents).expect("parents point to earlier vertices")
    }
}

impl Scheme for TreedepthScheme {
    fn name(&self) -> String {
        format!("td[t={}]", self.t)
    }

    fn prove(&self, g: &Graph, model: Option<&Model>) -> Result<CertMap, CertifyError> {
        let m = coherent_model(g, model, self.t)?;
        Ok(certs_from_model(g, &m, self.widths(g)))
    }

    fn verify(&self, view: &LocalView) -> bool {
        verify_treedepth(view, self.t)
    }

    fn strategies(&self) -> Vec<&'static str> {
        vec!["honest-overflow", "forged-suffix", "random-tree", "dfs-chain"]
    }

    /// `honest-overflow`: honest certificates for an optimal (too deep) model.
    /// `forged-suffix`: the same with ancestors cut from deep lists so every
    /// list fits the bound. `random-tree`: random trees of height at most `t`.
    /// `dfs-chain`: a DFS tree cut off at height `t`.
    fn cheat(&self, g: &Graph, strategy: &str, seed: u64) -> Vec<CertMap> {
        let mut rng = rng_for(seed);
        let t = self.t;
        match strategy {
            "honest-overflow" => Self::optimal_model(g)
                .map(|m| certs_from_model(g, &m, self.cheat_widths(g, m.height() + 1)))
                .into_iter()
                .collect(),
            "forged-suffix" => {
                let Some(m) = Self::optimal_model(g) else { return Vec::new() };
                let w = self.cheat_widths(g, m.height() + 1);
                let honest = certs_from_model(g, &m, w);
                let mut out = Vec::new();
                // cut position: which ancestor entry to drop (1 = own parent)
                for cut in 1..=m.height().max(1) {
                    let mut c = honest.clone();
                    for (v, cert) in c.iter_mut() {
                        let d = m.depth(*v);
                        if d <= t {
                            continue;
                        }
                        let drop = d - t;
                        if let Some(Value::List { items, .. }) = cert.get_mut("anc") {
                            let at = cut.min(items.len() - drop);
                            items.drain(at..at + drop);
                        }
                        if let Some(Value::SubList { items, .. }) = cert.get_mut("frags") {
                            items.truncate(d - drop);
                            for (i, f) in items.iter_mut().enumerate() {
                                *f.get_mut("tag").expect("present") = Value::uint(i as u64 + 1, w.depth);
                            }
                        }
                    }
                    out.push(c);
                }
                out
            }
            "random-tree" => (0..16)
                .map(|_| {
                    let m = Self::random_model(g, t, &mut rng);
                    certs_from_model(g, &m, self.widths(g))
                })
                .collect(),
            "dfs-chain" => {
                let start = *g.ids().choose(&mut rng).expect("nonempty graph");
                let mut parents = BTreeMap::from([(start, start)]);
                let mut depth = BTreeMap::from([(start, 0usize)]);
                let mut stack = vec![start];
                while let Some(&v) = stack.last() {
                    let next = g.neighbor_ids(v).find(|u| !parents.contains_key(u));
                    match next {
                        Some(u) => {
                            // deeper than t: hang below the deepest allowed ancestor
                            let mut p = v;
                            while depth[&p] >= t && p != start {
                                p = parents[&p];
                            }
                            parents.insert(u, p);
                            depth.insert(u, depth[&p] + 1);
                            stack.push(u);
                        }
                        None => {
                            stack.pop();
                        }
                    }
                }
                let m = Model::from_parents(parents).expect("connected graph gives a spanning tree");
                vec![certs_from_model(g, &m, self.cheat_widths(g, m.height() + 1))]
            }
            _ => Vec::new(),
        }
    }
}
