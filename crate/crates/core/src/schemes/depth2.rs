use super::{check_tree, no, read_tree, tree_cert, CountScheme, TreeEntry};
use crate::cert::{CertMap, CertifyError, Certificate, LocalView, Scheme, Value, Widths};
use crate::graph::Graph;
use crate::logic::{LogicError, Sentence};
use crate::treedepth::Model;

/// The three properties that decide depth-2 sentences on connected graphs:
/// at most one vertex, clique, dominating vertex. Only four combinations
/// occur, in this order: K1, K2, P3, P4.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Single,
    Clique,
    Dominated,
    Other,
}

impl Profile {
    pub const ALL: [Profile; 4] = [Profile::Single, Profile::Clique, Profile::Dominated, Profile::Other];

    pub fn representative(self) -> Graph {
        match self {
            Profile::Single => Graph::path(1),
            Profile::Clique => Graph::complete(2),
            Profile::Dominated => Graph::path(3),
            Profile::Other => Graph::path(4),
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn from_claims(total: u64, clique: bool, dom: bool) -> Option<Profile> {
        match (total <= 1, clique, dom) {
            (true, true, true) => Some(Profile::Single),
            (false, true, true) => Some(Profile::Clique),
            (false, false, true) => Some(Profile::Dominated),
            (false, false, false) => Some(Profile::Other),
            _ => None,
        }
    }
}

pub fn profile_of(g: &Graph) -> Profile {
    let n = g.len();
    let full = (0..n).filter(|&i| g.degree(i) + 1 == n).count();
    if n <= 1 {
        Profile::Single
    } else if full == n {
        Profile::Clique
    } else if full > 0 {
        Profile::Dominated
    } else {
        Profile::Other
    }
}

/// Value of `f` on each profile, by evaluation on the representatives.
pub fn depth2_classify(f: &Sentence) -> Result<[bool; 4], LogicError> {
    let found = f.quantifier_depth();
    if found > 2 {
        return Err(LogicError::TooDeep { found, max: 2 });
    }
    Ok(Profile::ALL.map(|p| f.evaluate(&p.representative())))
}

/// Certifies a sentence of quantifier depth at most 2 by certifying which
/// profile the graph has. The vertex count comes from a count certificate;
/// "every vertex has degree n-1" and "no vertex has degree n-1" are checked
/// by every node with no extra data, and their negations are witnessed by a
/// spanning tree rooted at a vertex of the right degree.
#[derive(Clone, Debug)]
pub struct Depth2Scheme {
    sentence: Sentence,
    table: [bool; 4],
}

impl Depth2Scheme {
    pub fn new(sentence: &Sentence) -> Result<Self, LogicError> {
        Ok(Depth2Scheme { table: depth2_classify(sentence)?, sentence: sentence.clone() })
    }

    pub fn table(&self) -> [bool; 4] {
        self.table
    }

    fn certs_for(g: &Graph, clique: bool, dom: bool) -> Result<CertMap, CertifyError> {
        let n = g.len();
        let w = Widths::new(g, 0);
        let count = CountScheme::build(g)?;
        let rooted = |want_full: bool| {
            let r = g.ids().iter().copied().find(|&v| {
                let d = g.degree(g.index_of(v).expect("own vertex"));
                (d + 1 == n) == want_full
            });
            r.map(|r| super::bfs_tree(g, &super::all_nodes(g), r))
        };
        let dom_tree = if dom && !clique { Some(rooted(true).ok_or_else(|| no("no dominating vertex"))?) } else { None };
        let gap_tree = if clique { None } else { Some(rooted(false).ok_or_else(|| no("graph is a clique"))?) };
        let opt = |t: &Option<std::collections::BTreeMap<_, TreeEntry>>, v| Value::SubList {
            items: t.iter().map(|t| tree_cert(t[&v], w)).collect(),
            len_width: 1,
        };
        Ok(g.ids()
            .iter()
            .map(|&v| {
                let c = Certificate::new()
                    .with("count", Value::Sub { cert: count[&v].clone() })
                    .with("claims", Value::Bits { bits: vec![clique, dom], len_width: 0 })
                    .with("dom", opt(&dom_tree, v))
                    .with("gap", opt(&gap_tree, v));
                (v, c)
            })
            .collect())
    }

    /// Checks an optional tree field; `root_ok` tells whether the root's
    /// degree is acceptable.
    fn check_optional_tree(view: &LocalView, name: &str, present: bool, root_ok: bool) -> bool {
        let Some(own) = view.cert.sub_list(name) else { return false };
        if own.len() != present as usize {
            return false;
        }
        let Some(own) = own.first() else { return true };
        let Some(me) = read_tree(own) else { return false };
        let mut others = Vec::with_capacity(view.degree());
        for (u, c) in &view.neighbors {
            match c.sub_list(name).and_then(|l| l.first()).and_then(read_tree) {
                Some(e) => others.push((*u, e)),
                None => return false,
            }
        }
        check_tree(view.id, me, &others) && (me.dist != 0 || root_ok)
    }
}

impl Scheme for Depth2Scheme {
    fn name(&self) -> String {
        format!("fo2[{}]", self.sentence.formula())
    }

    fn prove(&self, g: &Graph, _model: Option<&Model>) -> Result<CertMap, CertifyError> {
        let p = profile_of(g);
        if !self.table[p.index()] {
            return Err(no("sentence is false on this graph"));
        }
        let (clique, dom) = match p {
            Profile::Single | Profile::Clique => (true, true),
            Profile::Dominated => (false, true),
            Profile::Other => (false, false),
        };
        Self::certs_for(g, clique, dom)
    }

    fn verify(&self, view: &LocalView) -> bool {
        let Some(count) = view.cert.sub("count") else { return false };
        let Some(total) = CountScheme::check(view, count, |c| c.sub("count")) else { return false };
        let Some(claims) = view.cert.bits("claims") else { return false };
        let [clique, dom] = claims else { return false };
        if view.neighbors.iter().any(|(_, c)| c.bits("claims") != Some(claims)) {
            return false;
        }
        let full = view.degree() as u64 + 1 == total;
        if *clique && !full {
            return false;
        }
        if !*dom && full {
            return false;
        }
        if !Self::check_optional_tree(view, "dom", *dom && !*clique, full)
            || !Self::check_optional_tree(view, "gap", !*clique, !full)
        {
            return false;
        }
        match Profile::from_claims(total, *clique, *dom) {
            Some(p) => self.table[p.index()],
            None => false,
        }
    }

    fn strategies(&self) -> Vec<&'static str> {
        vec!["claim-profile"]
    }

    /// Certificates claiming each satisfying profile other than the true one.
    fn cheat(&self, g: &Graph, strategy: &str, _seed: u64) -> Vec<CertMap> {
        if strategy != "claim-profile" {
            return Vec::new();
        }
        let w = Widths::new(g, 0);
        let Ok(count) = CountScheme::build(g) else { return Vec::new() };
        let tree = super::bfs_tree(g, &super::all_nodes(g), g.id(0));
        let mut out = Vec::new();
        for (clique, dom) in [(true, true), (false, true), (false, false)] {
            let certs = g
                .ids()
                .iter()
                .map(|v| {
                    let one = |on: bool| Value::SubList {
                        items: if on { vec![tree_cert(tree[v], w)] } else { Vec::new() },
                        len_width: 1,
                    };
                    let c = Certificate::new()
                        .with("count", Value::Sub { cert: count[v].clone() })
                        .with("claims", Value::Bits { bits: vec![clique, dom], len_width: 0 })
                        .with("dom", one(dom && !clique))
                        .with("gap", one(!clique));
                    (*v, c)
                })
                .collect();
            out.push(certs);
        }
        out
    }
}
