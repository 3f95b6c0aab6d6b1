use super::{read_tree, SpanningTreeScheme};
use crate::cert::{CertMap, CertifyError, Certificate, LocalView, Scheme, Value, Widths};
use crate::graph::Graph;
use crate::treedepth::Model;

/// Spanning tree plus subtree sizes; certifies the number of vertices.
/// With `expected`, additionally certifies that this number is `expected`.
#[derive(Clone, Debug, Default)]
pub struct CountScheme {
    pub expected: Option<u64>,
}

impl CountScheme {
    pub(crate) fn build(g: &Graph) -> Result<CertMap, CertifyError> {
        let tree = SpanningTreeScheme::default().prove(g, None)?;
        let w = Widths::new(g, 0);
        let mut order: Vec<_> = tree.iter().map(|(v, c)| (read_tree(c).expect("honest").dist, *v)).collect();
        order.sort_unstable_by(|a, b| b.cmp(a));
        let mut size: std::collections::BTreeMap<_, u64> = g.ids().iter().map(|&v| (v, 1)).collect();
        for &(d, v) in &order {
            if d > 0 {
                let p = read_tree(&tree[&v]).expect("honest").parent;
                *size.get_mut(&p).expect("parent exists") += size[&v];
            }
        }
        let n = g.len() as u64;
        Ok(tree
            .into_iter()
            .map(|(v, mut c)| {
                c.push("total", Value::uint(n, w.counter));
                c.push("subtree", Value::uint(size[&v], w.counter));
                (v, c)
            })
            .collect())
    }

    /// The local checks on a node carrying count fields (possibly nested).
    /// `get` extracts the count part from a neighbor's certificate.
    pub(crate) fn check<'a>(
        view: &LocalView<'a>,
        own: &Certificate,
        get: impl Fn(&'a Certificate) -> Option<&'a Certificate>,
    ) -> Option<u64> {
        let total = own.uint("total")?;
        let subtree = own.uint("subtree")?;
        let me = read_tree(own)?;
        let mut others = Vec::with_capacity(view.degree());
        let mut below = 0u64;
        for (u, c) in &view.neighbors {
            let c = get(c)?;
            let e = read_tree(c)?;
            if c.uint("total")? != total {
                return None;
            }
            if e.parent == view.id && e.dist == me.dist + 1 {
                below = below.checked_add(c.uint("subtree")?)?;
            }
            others.push((*u, e));
        }
        let ok = super::check_tree(view.id, me, &others)
            && subtree == below + 1
            && (me.dist != 0 || subtree == total);
        ok.then_some(total)
    }
}

impl Scheme for CountScheme {
    fn name(&self) -> String {
        "count".into()
    }

    fn prove(&self, g: &Graph, _model: Option<&Model>) -> Result<CertMap, CertifyError> {
        if let Some(n) = self.expected {
            if g.len() as u64 != n {
                return Err(super::no(format!("graph has {} vertices, not {n}", g.len())));
            }
        }
        Self::build(g)
    }

    fn verify(&self, view: &LocalView) -> bool {
        match Self::check(view, view.cert, Some) {
            Some(total) => self.expected.is_none_or(|n| n == total),
            None => false,
        }
    }

    fn strategies(&self) -> Vec<&'static str> {
        vec!["forge-total"]
    }

    /// Honest trees with the total (and optionally the root's subtree size)
    /// replaced by the expected count.
    fn cheat(&self, g: &Graph, strategy: &str, _seed: u64) -> Vec<CertMap> {
        let (Some(n), "forge-total", Ok(honest)) = (self.expected, strategy, Self::build(g)) else {
            return Vec::new();
        };
        let w = Widths::new(g, 0);
        let forged = |fix_root: bool| -> CertMap {
            honest
                .iter()
                .map(|(v, c)| {
                    let mut c = c.clone();
                    *c.get_mut("total").expect("present") = Value::uint(n, w.counter.max(64 - n.leading_zeros()));
                    if fix_root && c.uint("dist") == Some(0) {
                        *c.get_mut("subtree").expect("present") = Value::uint(n, 64 - n.leading_zeros());
                    }
                    (*v, c)
                })
                .collect()
        };
        vec![forged(false), forged(true)]
    }
}
