//! Certificates with exact bit accounting, radius-1 local views, the
//! verification runner, and the soundness fuzzers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generate::rng_for;
use crate::graph::{bits_for, Graph, NodeId};
use crate::treedepth::Model;

/// A certificate field value. Every variant knows its own width so the
/// serialized size is fully determined. Variable-length values carry a
/// length prefix of `len_width` bits; width 0 means the length follows from
/// other fields (for lists aligned with the ancestor list, say).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Value {
    Uint { value: u64, width: u32 },
    List { items: Vec<u64>, item_width: u32, len_width: u32 },
    Bits { bits: Vec<bool>, len_width: u32 },
    Sub { cert: Certificate },
    SubList { items: Vec<Certificate>, len_width: u32 },
}

fn fits(v: u64, width: u32) -> bool {
    width >= 64 || v >> width == 0
}

/// A zero-width length prefix means the length is implied by other fields.
fn fits_len(len: usize, width: u32) -> bool {
    width == 0 || fits(len as u64, width)
}

fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

fn push_uint(out: &mut Vec<bool>, v: u64, width: u32) {
    for i in (0..width).rev() {
        out.push(i < 64 && (v >> i) & 1 == 1);
    }
}

impl Value {
    pub fn uint(value: u64, width: u32) -> Value {
        Value::Uint { value, width }
    }

    pub fn id(id: NodeId, width: u32) -> Value {
        Value::Uint { value: id.0, width }
    }

    pub fn size_bits(&self) -> usize {
        match self {
            Value::Uint { width, .. } => *width as usize,
            Value::List { items, item_width, len_width } => *len_width as usize + items.len() * *item_width as usize,
            Value::Bits { bits, len_width } => *len_width as usize + bits.len(),
            Value::Sub { cert } => cert.size_bits(),
            Value::SubList { items, len_width } => {
                *len_width as usize + items.iter().map(Certificate::size_bits).sum::<usize>()
            }
        }
    }

    /// Every value fits its declared width and every length fits its prefix.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Value::Uint { value, width } => fits(*value, *width),
            Value::List { items, item_width, len_width } => {
                fits_len(items.len(), *len_width) && items.iter().all(|&v| fits(v, *item_width))
            }
            Value::Bits { bits, len_width } => fits_len(bits.len(), *len_width),
            Value::Sub { cert } => cert.is_well_formed(),
            Value::SubList { items, len_width } => {
                fits_len(items.len(), *len_width) && items.iter().all(Certificate::is_well_formed)
            }
        }
    }

    fn write_bits(&self, out: &mut Vec<bool>) {
        match self {
            Value::Uint { value, width } => push_uint(out, *value, *width),
            Value::List { items, item_width, len_width } => {
                push_uint(out, items.len() as u64, *len_width);
                for &v in items {
                    push_uint(out, v, *item_width);
                }
            }
            Value::Bits { bits, len_width } => {
                push_uint(out, bits.len() as u64, *len_width);
                out.extend_from_slice(bits);
            }
            Value::Sub { cert } => cert.write_bits(out),
            Value::SubList { items, len_width } => {
                push_uint(out, items.len() as u64, *len_width);
                for c in items {
                    c.write_bits(out);
                }
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Uint { value, .. } => write!(f, "{value}"),
            Value::List { items, .. } => {
                let parts: Vec<String> = items.iter().map(u64::to_string).collect();
                write!(f, "[{}]", parts.join(","))
            }
            Value::Bits { bits, .. } => {
                f.write_str("b")?;
                for &b in bits {
                    f.write_str(if b { "1" } else { "0" })?;
                }
                Ok(())
            }
            Value::Sub { cert } => write!(f, "{{{cert}}}"),
            Value::SubList { items, .. } => {
                let parts: Vec<String> = items.iter().map(|c| format!("{{{c}}}")).collect();
                write!(f, "[{}]", parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    pub value: Value,
}

/// An ordered list of named fields.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Certificate {
    pub fields: Vec<Field>,
}

impl Certificate {
    pub fn new() -> Self {
        Certificate::default()
    }

    pub fn with(mut self, name: &str, value: Value) -> Self {
        self.push(name, value);
        self
    }

    pub fn push(&mut self, name: &str, value: Value) {
        self.fields.push(Field { name: name.to_string(), value });
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.fields.iter().find(|f| f.name == name).map(|f| &f.value)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Value> {
        self.fields.iter_mut().find(|f| f.name == name).map(|f| &mut f.value)
    }

    pub fn uint(&self, name: &str) -> Option<u64> {
        match self.get(name)? {
            Value::Uint { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.uint(name).map(NodeId)
    }

    pub fn list(&self, name: &str) -> Option<&[u64]> {
        match self.get(name)? {
            Value::List { items, .. } => Some(items),
            _ => None,
        }
    }

    pub fn bits(&self, name: &str) -> Option<&[bool]> {
        match self.get(name)? {
            Value::Bits { bits, .. } => Some(bits),
            _ => None,
        }
    }

    pub fn sub(&self, name: &str) -> Option<&Certificate> {
        match self.get(name)? {
            Value::Sub { cert } => Some(cert),
            _ => None,
        }
    }

    pub fn sub_list(&self, name: &str) -> Option<&[Certificate]> {
        match self.get(name)? {
            Value::SubList { items, .. } => Some(items),
            _ => None,
        }
    }

    /// Bit size of the canonical serialization.
    pub fn size_bits(&self) -> usize {
        self.fields.iter().map(|f| f.value.size_bits()).sum()
    }

    /// Bits of the named fields only.
    pub fn field_bits(&self, names: &[&str]) -> usize {
        self.fields.iter().filter(|f| names.contains(&f.name.as_str())).map(|f| f.value.size_bits()).sum()
    }

    pub fn is_well_formed(&self) -> bool {
        self.fields.iter().all(|f| f.value.is_well_formed())
    }

    /// Canonical serialization: fields in order, integers big-endian in their
    /// declared width, variable-length values prefixed by their length.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.size_bits());
        self.write_bits(&mut out);
        out
    }

    fn write_bits(&self, out: &mut Vec<bool>) {
        for f in &self.fields {
            f.value.write_bits(out);
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.fields.iter().map(|x| format!("{}={}({}b)", x.name, x.value, x.value.size_bits())).collect();
        f.write_str(&parts.join(", "))
    }
}

pub type CertMap = BTreeMap<NodeId, Certificate>;

/// Standard field widths for a graph and a depth bound `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Widths {
    /// `ceil(log2(idBound + 1))`
    pub id: u32,
    /// `ceil(log2(n + 1))`
    pub counter: u32,
    /// `ceil(log2(t + 2))`
    pub depth: u32,
}

impl Widths {
    pub fn new(g: &Graph, t: usize) -> Widths {
        Widths { id: g.id_width(), counter: g.counter_width(), depth: bits_for(t as u64 + 1) }
    }
}

/// Everything a node may read: its id, its certificate, and the ids and
/// certificates of its neighbors. Its degree is the number of neighbors.
#[derive(Clone, Debug)]
pub struct LocalView<'a> {
    pub id: NodeId,
    pub cert: &'a Certificate,
    pub neighbors: Vec<(NodeId, &'a Certificate)>,
}

impl LocalView<'_> {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_neighbor(&self, id: NodeId) -> bool {
        self.neighbors.iter().any(|(u, _)| *u == id)
    }

    pub fn neighbor_cert(&self, id: NodeId) -> Option<&Certificate> {
        self.neighbors.iter().find(|(u, _)| *u == id).map(|(_, c)| *c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    pub rejecting: BTreeSet<NodeId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertError {
    #[error("no certificate for node {0}")]
    MissingCertificate(NodeId),
    #[error("certificate for {0}, which is not a graph node")]
    UnknownNode(NodeId),
    #[error("malformed certificate file: {0}")]
    Format(String),
}

/// Why a prover refused.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertifyError {
    #[error("cannot certify: {0}")]
    NoInstance(String),
}

/// A certification scheme: an honest prover and a local verifier.
pub trait Scheme: Sync {
    fn name(&self) -> String;

    /// Certificates for a yes-instance. Schemes that need an elimination tree
    /// use `model` when given and compute one otherwise.
    fn prove(&self, g: &Graph, model: Option<&Model>) -> Result<CertMap, CertifyError>;

    fn verify(&self, view: &LocalView) -> bool;

    /// Names of the structured cheating strategies this scheme knows.
    fn strategies(&self) -> Vec<&'static str> {
        Vec::new()
    }

    /// Cheating certificate maps for `g` built with one strategy.
    fn cheat(&self, _g: &Graph, _strategy: &str, _seed: u64) -> Vec<CertMap> {
        Vec::new()
    }
}

pub fn local_view<'a>(g: &Graph, c: &'a CertMap, v: NodeId) -> Result<LocalView<'a>, CertError> {
    let cert = c.get(&v).ok_or(CertError::MissingCertificate(v))?;
    let neighbors = g
        .neighbor_ids(v)
        .map(|u| c.get(&u).map(|cu| (u, cu)).ok_or(CertError::MissingCertificate(u)))
        .collect::<Result<_, _>>()?;
    Ok(LocalView { id: v, cert, neighbors })
}

/// Runs the verifier at every node (in parallel) and collects rejections.
pub fn run_verification(g: &Graph, c: &CertMap, s: &dyn Scheme) -> Result<Verdict, CertError> {
    if let Some(v) = g.ids().iter().find(|v| !c.contains_key(v)) {
        return Err(CertError::MissingCertificate(*v));
    }
    if let Some(v) = c.keys().find(|v| !g.contains(**v)) {
        return Err(CertError::UnknownNode(*v));
    }
    let rejecting: BTreeSet<NodeId> = g
        .ids()
        .par_iter()
        .filter(|&&v| {
            let view = local_view(g, c, v).expect("domain checked above");
            !s.verify(&view)
        })
        .copied()
        .collect();
    Ok(Verdict { accepted: rejecting.is_empty(), rejecting })
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SizeReport {
    pub max_bits: usize,
    pub total_bits: usize,
    pub per_node: BTreeMap<NodeId, usize>,
}

pub fn cert_size_bits(c: &CertMap) -> SizeReport {
    let per_node: BTreeMap<NodeId, usize> = c.iter().map(|(v, x)| (*v, x.size_bits())).collect();
    SizeReport {
        max_bits: per_node.values().copied().max().unwrap_or(0),
        total_bits: per_node.values().sum(),
        per_node,
    }
}

/// One line per node: `<id>: <field>=<value>(<bits>b), ...`.
pub fn dump_certs(c: &CertMap) -> String {
    c.iter().map(|(v, x)| format!("{v}: {x}\n")).collect()
}

pub fn certs_to_json(c: &CertMap) -> String {
    serde_json::to_string_pretty(c).expect("certificates always serialize")
}

pub fn certs_from_json(text: &str) -> Result<CertMap, CertError> {
    let c: CertMap = serde_json::from_str(text).map_err(|e| CertError::Format(e.to_string()))?;
    match c.iter().find(|(_, x)| !x.is_well_formed()) {
        Some((v, _)) => Err(CertError::Format(format!("certificate of {v} does not fit its declared widths"))),
        None => Ok(c),
    }
}

enum Leaf<'a> {
    Int(&'a mut u64, u32),
    Bit(&'a mut bool),
}

enum Seq<'a> {
    Ints(&'a mut Vec<u64>, u32, u32),
    Bits(&'a mut Vec<bool>, u32),
    Certs(&'a mut Vec<Certificate>, u32),
}

fn leaves<'a>(c: &'a mut Certificate, prefix: &str, out: &mut Vec<(String, Leaf<'a>)>) {
    for f in c.fields.iter_mut() {
        let path = format!("{prefix}{}", f.name);
        match &mut f.value {
            Value::Uint { value, width } => out.push((path, Leaf::Int(value, *width))),
            Value::List { items, item_width, .. } => {
                for (i, x) in items.iter_mut().enumerate() {
                    out.push((format!("{path}[{i}]"), Leaf::Int(x, *item_width)));
                }
            }
            Value::Bits { bits, .. } => {
                for (i, b) in bits.iter_mut().enumerate() {
                    out.push((format!("{path}[{i}]"), Leaf::Bit(b)));
                }
            }
            Value::Sub { cert } => leaves(cert, &format!("{path}."), out),
            Value::SubList { items, .. } => {
                for (i, x) in items.iter_mut().enumerate() {
                    leaves(x, &format!("{path}[{i}]."), out);
                }
            }
        }
    }
}

fn count_seqs(c: &Certificate) -> usize {
    c.fields
        .iter()
        .map(|f| match &f.value {
            Value::Uint { .. } => 0,
            Value::List { .. } | Value::Bits { .. } => 1,
            Value::Sub { cert } => count_seqs(cert),
            Value::SubList { items, .. } => 1 + items.iter().map(count_seqs).sum::<usize>(),
        })
        .sum()
}

/// Calls `f` on the `target`-th variable-length value in traversal order.
fn with_seq(c: &mut Certificate, target: &mut usize, f: &mut dyn FnMut(Seq)) -> bool {
    for field in c.fields.iter_mut() {
        match &mut field.value {
            Value::Uint { .. } => {}
            Value::List { items, item_width, len_width } => {
                if *target == 0 {
                    f(Seq::Ints(items, *item_width, *len_width));
                    return true;
                }
                *target -= 1;
            }
            Value::Bits { bits, len_width } => {
                if *target == 0 {
                    f(Seq::Bits(bits, *len_width));
                    return true;
                }
                *target -= 1;
            }
            Value::Sub { cert } => {
                if with_seq(cert, target, f) {
                    return true;
                }
            }
            Value::SubList { items, len_width } => {
                if *target == 0 {
                    f(Seq::Certs(items, *len_width));
                    return true;
                }
                *target -= 1;
                for x in items.iter_mut() {
                    if with_seq(x, target, f) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn mutate_leaf(leaf: Leaf, rng: &mut ChaCha8Rng, op: u8) {
    match leaf {
        Leaf::Bit(b) => *b = !*b,
        Leaf::Int(x, width) => {
            let m = mask(width);
            *x = match op {
                0 if width > 0 => *x ^ (1u64 << rng.gen_range(0..width.min(64))),
                1 => rng.gen::<u64>() & m,
                _ if rng.gen_bool(0.5) => x.wrapping_add(1) & m,
                _ => x.wrapping_sub(1) & m,
            };
        }
    }
}

/// A single random edit; may leave `c` unchanged.
fn mutate_once(c: &mut CertMap, rng: &mut ChaCha8Rng) {
    let nodes: Vec<NodeId> = c.keys().copied().collect();
    if nodes.is_empty() {
        return;
    }
    let v = *nodes.choose(rng).expect("nonempty");
    match rng.gen_range(0..8u8) {
        op @ 0..=2 => {
            let cert = c.get_mut(&v).expect("key exists");
            let mut ls = Vec::new();
            leaves(cert, "", &mut ls);
            if let Some(i) = (!ls.is_empty()).then(|| rng.gen_range(0..ls.len())) {
                let (_, leaf) = ls.swap_remove(i);
                mutate_leaf(leaf, rng, op);
            }
        }
        3 => {
            let u = *nodes.choose(rng).expect("nonempty");
            let (a, b) = (c[&v].clone(), c[&u].clone());
            c.insert(v, b);
            c.insert(u, a);
        }
        4 => {
            let u = *nodes.choose(rng).expect("nonempty");
            let a = c[&v].clone();
            c.insert(u, a);
        }
        5 => {
            let cert = c.get_mut(&v).expect("key exists");
            let total = count_seqs(cert);
            if total == 0 {
                return;
            }
            let mut target = rng.gen_range(0..total);
            let grow = rng.gen_bool(0.5);
            with_seq(cert, &mut target, &mut |seq| match seq {
                Seq::Ints(items, w, lw) => {
                    if !grow {
                        items.pop();
                    } else if fits_len(items.len() + 1, lw) {
                        let x = items.choose(rng).copied().unwrap_or_else(|| rng.gen::<u64>() & mask(w));
                        let at = rng.gen_range(0..=items.len());
                        items.insert(at, x);
                    }
                }
                Seq::Bits(bits, lw) => {
                    if !grow {
                        bits.pop();
                    } else if fits_len(bits.len() + 1, lw) {
                        bits.push(rng.gen());
                    }
                }
                Seq::Certs(items, lw) => {
                    if !grow {
                        items.pop();
                    } else if fits_len(items.len() + 1, lw) {
                        if let Some(x) = items.choose(rng).cloned() {
                            items.push(x);
                        }
                    }
                }
            });
        }
        _ => {
            // the same edit at every node that has the chosen slot
            let mut donor = c[&v].clone();
            let path = {
                let mut ls = Vec::new();
                leaves(&mut donor, "", &mut ls);
                if ls.is_empty() {
                    return;
                }
                let i = rng.gen_range(0..ls.len());
                ls.swap_remove(i).0
            };
            let op = rng.gen_range(0..3u8);
            let seed: u64 = rng.gen();
            for cert in c.values_mut() {
                let mut ls = Vec::new();
                leaves(cert, "", &mut ls);
                if let Some((_, leaf)) = ls.into_iter().find(|(p, _)| *p == path) {
                    mutate_leaf(leaf, &mut rng_for(seed), op);
                }
            }
        }
    }
}

/// Deterministic stream of mutated certificate maps, each differing from the
/// input. Ends early if no edit can change the input.
pub struct Mutations {
    base: CertMap,
    rng: ChaCha8Rng,
    left: usize,
}

impl Iterator for Mutations {
    type Item = CertMap;

    fn next(&mut self) -> Option<CertMap> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        for _ in 0..64 {
            let mut c = self.base.clone();
            let edits = if self.rng.gen_bool(0.75) { 1 } else { self.rng.gen_range(2..5) };
            for _ in 0..edits {
                mutate_once(&mut c, &mut self.rng);
            }
            if c != self.base {
                return Some(c);
            }
        }
        self.left = 0;
        None
    }
}

/// Bit flips, random overwrites, increments and decrements, swapping and
/// copying whole certificates, truncating or extending lists, and the same
/// edit broadcast to every node.
pub fn mutate_certs(c: &CertMap, seed: u64, budget: usize) -> Mutations {
    Mutations { base: c.clone(), rng: rng_for(seed), left: budget }
}

/// Structured cheating attempts for every strategy in `strategies`.
pub fn adversarial_prover(g: &Graph, s: &dyn Scheme, strategies: &[&str], seed: u64) -> Vec<(String, CertMap)> {
    strategies
        .iter()
        .flat_map(|name| s.cheat(g, name, seed).into_iter().map(move |c| (name.to_string(), c)))
        .collect()
}

/// Number of certificate maps from `maps` that every node accepts.
pub fn count_escapes(g: &Graph, s: &dyn Scheme, maps: impl IntoIterator<Item = CertMap>) -> usize {
    maps.into_iter()
        .filter(|c| run_verification(g, c, s).map(|v| v.accepted).unwrap_or(false))
        .count()
}
