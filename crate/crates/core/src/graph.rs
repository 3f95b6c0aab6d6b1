//! Simple connected graphs with integer identifiers, plus the edge-list
//! text format used for corpora and golden files.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default exponent `c` of the identifier range `[1, n^c]`.
pub const DEFAULT_ID_EXPONENT: u32 = 2;

/// A node identifier. Identifiers are positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for NodeId {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(NodeId)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph has no vertices")]
    Empty,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("duplicate node {0}")]
    DuplicateNode(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("identifier {id} outside [1, {bound}]")]
    IdOutOfRange { id: NodeId, bound: u64 },
}

/// `ceil(log2(x + 1))`: the number of bits needed to write any value in `0..=x`.
pub fn bits_for(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// An immutable simple graph. Vertices are addressed either by [`NodeId`] or by
/// their dense index in ascending identifier order. Equality compares
/// vertices and edges; the identifier bound is not part of it.
#[derive(Clone)]
pub struct Graph {
    ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    adj: Vec<Vec<usize>>,
    rows: Vec<Vec<u64>>,
    id_bound: u64,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.adj == other.adj
    }
}

impl Eq for Graph {}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<_> = self.edge_ids().collect();
        f.debug_struct("Graph")
            .field("nodes", &self.ids)
            .field("edges", &edges)
            .finish()
    }
}

impl Graph {
    /// Builds a validated connected graph with identifier bound `n^2`.
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, GraphError> {
        Self::with_id_exponent(nodes, edges, DEFAULT_ID_EXPONENT)
    }

    /// Builds a validated connected graph whose identifiers must lie in `[1, n^exponent]`.
    pub fn with_id_exponent(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        exponent: u32,
    ) -> Result<Self, GraphError> {
        let nodes: Vec<NodeId> = nodes.into_iter().collect();
        let bound = (nodes.len() as u64).saturating_pow(exponent).max(1);
        let g = Self::build(nodes, edges, bound)?;
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    fn build(
        nodes: Vec<NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        id_bound: u64,
    ) -> Result<Self, GraphError> {
        if nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut ids = nodes;
        ids.sort();
        for w in ids.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateNode(w[0]));
            }
        }
        for &id in &ids {
            if id.0 == 0 || id.0 > id_bound {
                return Err(GraphError::IdOutOfRange { id, bound: id_bound });
            }
        }
        let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let n = ids.len();
        let words = n.div_ceil(64);
        let mut rows = vec![vec![0u64; words]; n];
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let i = *index.get(&a).ok_or(GraphError::UnknownNode(a))?;
            let j = *index.get(&b).ok_or(GraphError::UnknownNode(b))?;
            if rows[i][j / 64] >> (j % 64) & 1 == 1 {
                return Err(GraphError::DuplicateEdge(a, b));
            }
            rows[i][j / 64] |= 1 << (j % 64);
            rows[j][i / 64] |= 1 << (i % 64);
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { ids, index, adj, rows, id_bound })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Identifiers in ascending order; position = dense index.
    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> NodeId {
        self.ids[i]
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn neighbor_ids(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let i = self.index[&id];
        self.adj[i].iter().map(move |&j| self.ids[j])
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.rows[i][j / 64] >> (j % 64) & 1 == 1
    }

    pub fn adjacent_ids(&self, a: NodeId, b: NodeId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.adjacent(i, j),
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as index pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges().map(|(i, j)| (self.ids[i], self.ids[j]))
    }

    /// Upper end of the identifier range.
    pub fn id_bound(&self) -> u64 {
        self.id_bound
    }

    /// Width in bits of an identifier field: `ceil(log2(id_bound + 1))`.
    pub fn id_width(&self) -> u32 {
        bits_for(self.id_bound)
    }

    /// Width in bits of a counter in `0..=n`.
    pub fn counter_width(&self) -> u32 {
        bits_for(self.len() as u64)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &self.adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == n
    }

    /// Induced subgraph on `keep`. Connectivity is not re-checked and the
    /// identifier bound of `self` is inherited.
    pub fn induced_subgraph(&self, keep: &BTreeSet<NodeId>) -> Result<Graph, GraphError> {
        if let Some(&bad) = keep.iter().find(|id| !self.contains(**id)) {
            return Err(GraphError::UnknownNode(bad));
        }
        let edges: Vec<_> = self
            .edge_ids()
            .filter(|(a, b)| keep.contains(a) && keep.contains(b))
            .collect();
        Self::build(keep.iter().copied().collect(), edges, self.id_bound)
    }

    /// Renames vertices through `map`, which must be injective on `self.ids()`.
    pub fn relabel(&self, map: &BTreeMap<NodeId, NodeId>) -> Result<Graph, GraphError> {
        let get = |id: NodeId| map.get(&id).copied().ok_or(GraphError::UnknownNode(id));
        let nodes = self.ids.iter().map(|&id| get(id)).collect::<Result<Vec<_>, _>>()?;
        let edges = self
            .edge_ids()
            .map(|(a, b)| Ok((get(a)?, get(b)?)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        let bound = self.id_bound.max(nodes.iter().map(|id| id.0).max().unwrap_or(1));
        Self::build(nodes, edges, bound)
    }

    /// Graph on dense indices `0..n` mapped to identifiers `1..=n`.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
        Graph::new(
            (1..=n as u64).map(NodeId),
            edges.iter().map(|&(a, b)| (NodeId(a as u64 + 1), NodeId(b as u64 + 1))),
        )
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_index_edges(n, &edges).expect("path is valid")
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "cycle needs at least three vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_index_edges(n, &edges).expect("cycle is valid")
    }

    pub fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Graph::from_index_edges(n, &edges).expect("clique is valid")
    }

    /// Star `K_{1,leaves}` with center `1`.
    pub fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Graph::from_index_edges(leaves + 1, &edges).expect("star is valid")
    }

    /// Serializes to the edge-list format accepted by [`load_graph`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("p {} {}\n", self.len(), self.edge_count());
        for id in &self.ids {
            out.push_str(&format!("v {id}\n"));
        }
        for (a, b) in self.edge_ids() {
            out.push_str(&format!("e {a} {b}\n"));
        }
        out
    }
}

/// Parses the edge-list format:
///
/// ```text
/// # comment
/// p <n> <m>
/// v <id>        (n lines)
/// e <id> <id>   (m lines)
/// ```
pub fn load_graph(text: &str) -> Result<Graph, GraphError> {
    load_graph_with_exponent(text, DEFAULT_ID_EXPONENT)
}

pub fn load_graph_with_exponent(text: &str, exponent: u32) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: &str| GraphError::Parse { line, msg: msg.to_string() };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let num = |s: &str| s.parse::<u64>().map_err(|_| err(&format!("bad number `{s}`")));
        match tokens.as_slice() {
            ["p", n, m] => {
                if header.is_some() {
                    return Err(err("repeated header"));
                }
                header = Some((num(n)? as usize, num(m)? as usize));
            }
            _ if header.is_none() => return Err(err("expected `p <n> <m>` header")),
            ["v", id] => {
                if !edges.is_empty() {
                    return Err(err("vertex line after edge lines"));
                }
                nodes.push(NodeId(num(id)?));
            }
            ["e", a, b] => edges.push((NodeId(num(a)?), NodeId(num(b)?))),
            _ => return Err(err(&format!("unrecognized line `{content}`"))),
        }
    }
    let (n, m) = header.ok_or(GraphError::Parse { line: 0, msg: "missing header".into() })?;
    if nodes.len() != n {
        return Err(GraphError::Parse {
            line: 0,
            msg: format!("header declares {n} vertices, found {}", nodes.len()),
        });
    }
    if edges.len() != m {
        return Err(GraphError::Parse {
            line: 0,
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    Graph::with_id_exponent(nodes, edges, exponent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u64]) -> BTreeSet<NodeId> {
        v.iter().map(|&x| NodeId(x)).collect()
    }

    #[test]
    fn loads_p3() {
        let g = load_graph("p 3 2\nv 1\nv 2\nv 3\ne 1 2\ne 2 3\n").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.ids(), &[NodeId(1), NodeId(2), NodeId(3)]);
        assert!(g.adjacent_ids(NodeId(1), NodeId(2)));
        assert!(!g.adjacent_ids(NodeId(1), NodeId(3)));
    }

    #[test]
    fn comments_are_ignored() {
        let g = load_graph("# a path\np 2 1 # header\nv 1\nv 2\n\ne 1 2\n").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn rejects_self_loop() {
        let text = "p 5 1\nv 1\nv 2\nv 3\nv 4\nv 5\ne 5 5\n";
        assert_eq!(load_graph(text), Err(GraphError::SelfLoop(NodeId(5))));
    }

    #[test]
    fn rejects_disconnected() {
        let text = "p 4 2\nv 1\nv 2\nv 3\nv 4\ne 1 2\ne 3 4\n";
        assert_eq!(load_graph(text), Err(GraphError::Disconnected));
    }

    #[test]
    fn rejects_duplicate_edge() {
        let text = "p 2 2\nv 1\nv 2\ne 1 2\ne 2 1\n";
        assert!(matches!(load_graph(text), Err(GraphError::DuplicateEdge(..))));
    }

    #[test]
    fn rejects_out_of_range_id() {
        // n = 2 so ids must lie in [1, 4]
        let text = "p 2 1\nv 1\nv 5\ne 1 5\n";
        assert!(matches!(load_graph(text), Err(GraphError::IdOutOfRange { .. })));
        assert!(load_graph_with_exponent(text, 3).is_ok());
    }

    #[test]
    fn rejects_bad_syntax() {
        assert!(matches!(load_graph("v 1\n"), Err(GraphError::Parse { .. })));
        assert!(matches!(load_graph("p 1 0\nv x\n"), Err(GraphError::Parse { .. })));
        assert!(matches!(load_graph("p 2 0\nv 1\n"), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn induced_subgraph_examples() {
        let p3 = Graph::path(3);
        let h = p3.induced_subgraph(&ids(&[1, 3])).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.edge_count(), 0);

        assert_eq!(p3.induced_subgraph(&p3.ids().iter().copied().collect()).unwrap(), p3);

        let c4 = Graph::cycle(4);
        let h = c4.induced_subgraph(&ids(&[1, 2, 3])).unwrap();
        assert_eq!(h, Graph::path(3));

        assert_eq!(p3.induced_subgraph(&ids(&[9])), Err(GraphError::UnknownNode(NodeId(9))));
    }

    #[test]
    fn widths() {
        assert_eq!(bits_for(0), 0);
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(49), 6);
        assert_eq!(bits_for(64), 7);
        assert_eq!(Graph::path(7).id_width(), 6);
        assert_eq!(Graph::path(7).counter_width(), 3);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::cycle(5);
        assert_eq!(load_graph(&g.to_edge_list()).unwrap(), g);
    }
}
