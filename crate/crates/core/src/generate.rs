//! Seeded graph generators and exhaustive enumeration of small graphs up to
//! isomorphism.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, NodeId, DEFAULT_ID_EXPONENT};
use crate::treedepth::Model;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("need at least one vertex")]
    Empty,
    #[error("{n} vertices do not fit in a tree of height 0")]
    Infeasible { n: usize },
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` distinct identifiers drawn from `[1, n^2]`.
pub fn random_ids(rng: &mut impl Rng, n: usize) -> Vec<NodeId> {
    let bound = (n as u64).saturating_pow(DEFAULT_ID_EXPONENT).max(1) as usize;
    index::sample(rng, bound, n).into_iter().map(|i| NodeId(i as u64 + 1)).collect()
}

/// Random connected graph: a random recursive tree plus each remaining pair
/// independently with probability `extra`.
pub fn random_connected_graph_with(n: usize, extra: f64, seed: u64) -> Result<Graph, GenError> {
    if n == 0 {
        return Err(GenError::Empty);
    }
    let mut rng = rng_for(seed);
    let ids = random_ids(&mut rng, n);
    let mut edges = BTreeSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.insert((j, i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.gen_bool(extra) {
                edges.insert((i, j));
            }
        }
    }
    Ok(Graph::new(ids.iter().copied(), edges.iter().map(|&(a, b)| (ids[a], ids[b])))
        .expect("generator output is valid"))
}

/// Random connected graph with roughly `n/2` non-tree edges on average.
pub fn random_connected_graph(n: usize, seed: u64) -> Result<Graph, GenError> {
    let extra = if n < 2 { 0.0 } else { (1.0 / (n - 1) as f64).min(1.0) };
    random_connected_graph_with(n, extra, seed)
}

/// Random graph together with a coherent model of height at most `t`.
///
/// A random rooted tree of height at most `t` is drawn first; edges are then
/// added only between ancestor/descendant pairs (each tree edge with
/// probability 0.6, every other such pair with probability `extra`), and
/// finally every child subtree that touches no vertex of its parent gets one
/// random edge to it, which makes the model coherent and the graph connected.
pub fn random_bounded_treedepth_graph_with(
    t: usize,
    n: usize,
    extra: f64,
    seed: u64,
) -> Result<(Graph, Model), GenError> {
    if n == 0 {
        return Err(GenError::Empty);
    }
    if t == 0 && n > 1 {
        return Err(GenError::Infeasible { n });
    }
    let mut rng = rng_for(seed);
    let ids = random_ids(&mut rng, n);
    let mut parent = vec![0usize; n];
    let mut depth = vec![0usize; n];
    for i in 1..n {
        let open: Vec<usize> = (0..i).filter(|&j| depth[j] < t).collect();
        let p = *open.choose(&mut rng).expect("root is always open");
        parent[i] = p;
        depth[i] = depth[p] + 1;
    }
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 1..n {
        if rng.gen_bool(0.6) {
            edges.insert((parent[i], i));
        }
        let mut a = parent[i];
        while a != 0 {
            a = parent[a];
            if rng.gen_bool(extra) {
                edges.insert((a, i));
            }
        }
    }
    // children have larger indices than parents, so descending order is bottom-up
    let mut subtree: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for v in (1..n).rev() {
        let p = parent[v];
        if !subtree[v].iter().any(|&u| edges.contains(&(p.min(u), p.max(u)))) {
            let u = *subtree[v].choose(&mut rng).expect("subtree contains v");
            edges.insert((p.min(u), p.max(u)));
        }
        let sub = std::mem::take(&mut subtree[v]);
        subtree[p].extend(sub.iter().copied());
        subtree[v] = sub;
    }
    let graph = Graph::new(ids.iter().copied(), edges.iter().map(|&(a, b)| (ids[a], ids[b])))
        .expect("coherent construction is connected");
    let parents: BTreeMap<NodeId, NodeId> = (0..n).map(|i| (ids[i], ids[parent[i]])).collect();
    let model = Model::from_parents(parents).expect("generated parents form a tree");
    Ok((graph, model))
}

pub fn random_bounded_treedepth_graph(t: usize, n: usize, seed: u64) -> Result<(Graph, Model), GenError> {
    random_bounded_treedepth_graph_with(t, n, 0.3, seed)
}

/// Canonical code of a small graph given by neighbor bitmasks: the minimum,
/// over all vertex orders compatible with the stable colour refinement, of
/// the upper-triangle adjacency bit string.
pub fn canonical_code(nbr: &[u32]) -> u64 {
    let n = nbr.len();
    assert!(n <= 11, "canonical codes are limited to 11 vertices");
    let mut color: Vec<usize> = nbr.iter().map(|m| m.count_ones() as usize).collect();
    loop {
        let sigs: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut ns: Vec<usize> = (0..n).filter(|&u| nbr[v] >> u & 1 == 1).map(|u| color[u]).collect();
                ns.sort_unstable();
                (color[v], ns)
            })
            .collect();
        let mut distinct: Vec<&(usize, Vec<usize>)> = sigs.iter().collect();
        distinct.sort();
        distinct.dedup();
        let next: Vec<usize> = sigs.iter().map(|s| distinct.binary_search(&s).unwrap()).collect();
        let before: HashSet<usize> = color.iter().copied().collect();
        if distinct.len() == before.len() {
            color = next;
            break;
        }
        color = next;
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        classes.entry(color[v]).or_default().push(v);
    }
    let classes: Vec<Vec<usize>> = classes.into_values().collect();
    let mut order = Vec::with_capacity(n);
    let mut best = u64::MAX;
    fn rec(classes: &[Vec<usize>], ci: usize, used: &mut Vec<bool>, order: &mut Vec<usize>, nbr: &[u32], best: &mut u64) {
        if ci == classes.len() {
            let n = order.len();
            let mut code = 0u64;
            let mut bit = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if nbr[order[i]] >> order[j] & 1 == 1 {
                        code |= 1 << bit;
                    }
                    bit += 1;
                }
            }
            *best = (*best).min(code);
            return;
        }
        let class = &classes[ci];
        let placed = order.len();
        let class_start = classes[..ci].iter().map(Vec::len).sum::<usize>();
        if placed == class_start + class.len() {
            rec(classes, ci + 1, used, order, nbr, best);
            return;
        }
        for &v in class {
            let slot = class.iter().position(|&u| u == v).unwrap();
            if used[slot + class_start] {
                continue;
            }
            used[slot + class_start] = true;
            order.push(v);
            rec(classes, ci, used, order, nbr, best);
            order.pop();
            used[slot + class_start] = false;
        }
    }
    let mut used = vec![false; n];
    rec(&classes, 0, &mut used, &mut order, nbr, &mut best);
    best
}

fn decode(n: usize, code: u64) -> Vec<u32> {
    let mut nbr = vec![0u32; n];
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if code >> bit & 1 == 1 {
                nbr[i] |= 1 << j;
                nbr[j] |= 1 << i;
            }
            bit += 1;
        }
    }
    nbr
}

fn connected_mask(nbr: &[u32]) -> bool {
    let n = nbr.len();
    let all = (1u32 << n) - 1;
    let mut seen = 1u32;
    let mut frontier = 1u32;
    while frontier != 0 {
        let mut next = 0;
        for i in 0..n {
            if frontier >> i & 1 == 1 {
                next |= nbr[i];
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == all
}

/// All graphs on `n` vertices up to isomorphism, as canonical codes.
pub fn all_graph_codes(n: usize) -> Vec<u64> {
    assert!((1..=11).contains(&n));
    let mut level: BTreeSet<u64> = BTreeSet::from([0]);
    for size in 2..=n {
        let mut next = BTreeSet::new();
        for &code in &level {
            let base = decode(size - 1, code);
            for subset in 0u32..(1 << (size - 1)) {
                let mut nbr = base.clone();
                nbr.push(subset);
                for (i, m) in nbr.iter_mut().enumerate().take(size - 1) {
                    if subset >> i & 1 == 1 {
                        *m |= 1 << (size - 1);
                    }
                }
                next.insert(canonical_code(&nbr));
            }
        }
        level = next;
    }
    level.into_iter().collect()
}

/// All connected graphs on `n` vertices up to isomorphism, with ids `1..=n`.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    all_graph_codes(n)
        .into_iter()
        .map(|code| decode(n, code))
        .filter(|nbr| connected_mask(nbr))
        .map(|nbr| {
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| nbr[i] >> j & 1 == 1)
                .collect();
            Graph::from_index_edges(n, &edges).expect("connected by filter")
        })
        .collect()
}

/// Canonical code of a [`Graph`] with at most 11 vertices.
pub fn graph_code(g: &Graph) -> u64 {
    let nbr: Vec<u32> = (0..g.len())
        .map(|i| g.neighbors(i).iter().fold(0u32, |acc, &j| acc | 1 << j))
        .collect();
    canonical_code(&nbr)
}
