use std::collections::BTreeMap;

use rand::Rng;

use super::{Formula, LogicError, Sentence, Var};
use crate::graph::Graph;

/// Anything a sentence can be evaluated on: a finite vertex set `0..order`
/// with a symmetric irreflexive adjacency relation.
pub trait Structure {
    fn order(&self) -> usize;
    fn related(&self, a: usize, b: usize) -> bool;
}

impl Structure for Graph {
    fn order(&self) -> usize {
        self.len()
    }
    fn related(&self, a: usize, b: usize) -> bool {
        self.adjacent(a, b)
    }
}

/// A small structure given by an explicit adjacency matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DenseStructure {
    n: usize,
    bits: Vec<bool>,
}

impl DenseStructure {
    pub fn new(n: usize) -> Self {
        DenseStructure { n, bits: vec![false; n * n] }
    }

    pub fn set(&mut self, a: usize, b: usize, value: bool) {
        if a != b {
            self.bits[a * self.n + b] = value;
            self.bits[b * self.n + a] = value;
        }
    }
}

impl Structure for DenseStructure {
    fn order(&self) -> usize {
        self.n
    }
    fn related(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.n + b]
    }
}

/// Formula with variables resolved to environment slots. A binder's slot is
/// its nesting level, so the environment never exceeds the quantifier depth
/// plus the number of pre-assigned free variables.
#[derive(Clone, Debug)]
pub(crate) enum Compiled {
    Const(bool),
    Eq(usize, usize),
    Adj(usize, usize),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Forall(usize, Box<Compiled>),
    Exists(usize, Box<Compiled>),
}

/// Compiles `f` with `free` bound to slots `0..free.len()`. Returns the
/// program and the number of slots it needs. Unknown variables must have been
/// rejected by the caller.
pub(crate) fn compile(f: &Formula, free: &[Var]) -> (Compiled, usize) {
    fn go(f: &Formula, scope: &mut Vec<Var>, max: &mut usize) -> Compiled {
        let slot = |scope: &Vec<Var>, v: &Var| {
            scope.iter().rposition(|x| x == v).expect("variable resolved before compilation")
        };
        match f {
            Formula::Const(b) => Compiled::Const(*b),
            Formula::Eq(x, y) => Compiled::Eq(slot(scope, x), slot(scope, y)),
            Formula::Adj(x, y) => Compiled::Adj(slot(scope, x), slot(scope, y)),
            Formula::Not(g) => Compiled::Not(Box::new(go(g, scope, max))),
            Formula::And(a, b) => Compiled::And(Box::new(go(a, scope, max)), Box::new(go(b, scope, max))),
            Formula::Or(a, b) => Compiled::Or(Box::new(go(a, scope, max)), Box::new(go(b, scope, max))),
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                let s = scope.len();
                scope.push(x.clone());
                *max = (*max).max(scope.len());
                let body = Box::new(go(g, scope, max));
                scope.pop();
                if matches!(f, Formula::Forall(..)) {
                    Compiled::Forall(s, body)
                } else {
                    Compiled::Exists(s, body)
                }
            }
        }
    }
    let mut scope = free.to_vec();
    let mut max = scope.len();
    let c = go(f, &mut scope, &mut max);
    (c, max)
}

pub(crate) fn run(c: &Compiled, s: &impl Structure, env: &mut [usize]) -> bool {
    match c {
        Compiled::Const(b) => *b,
        Compiled::Eq(x, y) => env[*x] == env[*y],
        Compiled::Adj(x, y) => s.related(env[*x], env[*y]),
        Compiled::Not(g) => !run(g, s, env),
        Compiled::And(a, b) => run(a, s, env) && run(b, s, env),
        Compiled::Or(a, b) => run(a, s, env) || run(b, s, env),
        Compiled::Forall(slot, g) => (0..s.order()).all(|v| {
            env[*slot] = v;
            run(g, s, env)
        }),
        Compiled::Exists(slot, g) => (0..s.order()).any(|v| {
            env[*slot] = v;
            run(g, s, env)
        }),
    }
}

/// Brute-force satisfaction `s ⊨ f`.
pub fn evaluate(s: &impl Structure, f: &Sentence) -> bool {
    f.evaluate(s)
}

/// Evaluates a formula whose free variables are interpreted by `assignment`
/// (vertex indices of `s`).
pub fn evaluate_with(
    s: &impl Structure,
    f: &Formula,
    assignment: &BTreeMap<Var, usize>,
) -> Result<bool, LogicError> {
    if let Some(v) = f.free_vars().into_iter().find(|v| !assignment.contains_key(v)) {
        return Err(LogicError::Unbound(v));
    }
    let names: Vec<Var> = assignment.keys().cloned().collect();
    let (c, slots) = compile(f, &names);
    let mut env = vec![0; slots];
    for (i, v) in assignment.values().enumerate() {
        env[i] = *v;
    }
    Ok(run(&c, s, &mut env))
}

/// Draws a random sentence of quantifier depth at most `depth` over variables
/// `x0, x1, ...`.
pub fn random_sentence(rng: &mut impl Rng, depth: usize) -> Sentence {
    fn go(rng: &mut impl Rng, depth: usize, scope: &mut Vec<Var>, size: usize) -> Formula {
        let can_atom = !scope.is_empty();
        let can_quant = depth > 0;
        if !can_atom && !can_quant {
            return Formula::Const(rng.gen());
        }
        let roll: u32 = rng.gen_range(0..100);
        let shrinking = size > 6;
        if can_quant && (!can_atom || roll < 35) && !(shrinking && can_atom && roll > 20) {
            let x = format!("x{}", scope.len());
            scope.push(x.clone());
            let body = go(rng, depth - 1, scope, size + 1);
            scope.pop();
            return if rng.gen_bool(0.5) { Formula::Exists(x, Box::new(body)) } else { Formula::Forall(x, Box::new(body)) };
        }
        if can_atom && (shrinking || roll < 60) {
            // mostly distinct variables, one of them the innermost
            let a = scope[scope.len() - 1].clone();
            let b = if scope.len() > 1 && rng.gen_bool(0.9) {
                scope[rng.gen_range(0..scope.len() - 1)].clone()
            } else {
                scope[rng.gen_range(0..scope.len())].clone()
            };
            let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            let atom = if rng.gen_bool(0.5) { Formula::Eq(a, b) } else { Formula::Adj(a, b) };
            return if rng.gen_bool(0.3) { Formula::not(atom) } else { atom };
        }
        if roll < 70 {
            return Formula::not(go(rng, depth, scope, size + 1));
        }
        let a = go(rng, depth, scope, size + 2);
        let b = go(rng, depth, scope, size + 2);
        if roll < 85 {
            Formula::and(a, b)
        } else {
            Formula::or(a, b)
        }
    }
    Sentence::new(go(rng, depth, &mut Vec::new(), 0)).expect("generator only uses bound variables")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn free_variable_assignment() {
        let g = Graph::path(3);
        let f = parse_formula("x ~ y & exists z (z ~ y & z != x)").unwrap();
        let a: BTreeMap<Var, usize> = [("x".into(), 0), ("y".into(), 1)].into();
        assert!(evaluate_with(&g, &f, &a).unwrap());
        let a: BTreeMap<Var, usize> = [("x".into(), 0), ("y".into(), 2)].into();
        assert!(!evaluate_with(&g, &f, &a).unwrap());
        let a: BTreeMap<Var, usize> = [("x".into(), 0)].into();
        assert!(evaluate_with(&g, &f, &a).is_err());
    }

    #[test]
    fn random_sentences_respect_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let s = random_sentence(&mut rng, 3);
            assert!(s.quantifier_depth() <= 3);
        }
    }

    #[test]
    fn dense_structure_matches_graph() {
        let g = Graph::cycle(5);
        let mut d = DenseStructure::new(5);
        for (a, b) in g.edges() {
            d.set(a, b, true);
        }
        let f = Sentence::parse(crate::logic::corpus::DIAMETER_TWO).unwrap();
        assert_eq!(f.evaluate(&g), f.evaluate(&d));
    }
}
