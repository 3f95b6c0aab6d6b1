//! First-order sentences over graphs: syntax tree, concrete syntax, structural
//! measures, prenex normal form and a brute-force evaluator.

mod eval;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use eval::{evaluate, evaluate_with, random_sentence, DenseStructure, Structure};
pub use parser::parse_formula;

pub type Var = String;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Eq(Var, Var),
    Adj(Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    fn flip(self) -> Self {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable `{0}` is not bound by any quantifier")]
    Unbound(Var),
    #[error("sentence has quantifier depth {found}, at most {max} allowed")]
    TooDeep { found: usize, max: usize },
    #[error("sentence is not existential")]
    NotExistential,
}

impl Formula {
    pub fn eq(x: &str, y: &str) -> Self {
        Formula::Eq(x.into(), y.into())
    }

    pub fn adj(x: &str, y: &str) -> Self {
        Formula::Adj(x.into(), y.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, f: Formula) -> Self {
        Formula::Forall(x.into(), Box::new(f))
    }

    pub fn exists(x: &str, f: Formula) -> Self {
        Formula::Exists(x.into(), Box::new(f))
    }

    pub fn quantified(q: Quantifier, x: Var, f: Formula) -> Self {
        match q {
            Quantifier::Forall => Formula::Forall(x, Box::new(f)),
            Quantifier::Exists => Formula::Exists(x, Box::new(f)),
        }
    }

    /// Maximum nesting of quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Eq(..) | Formula::Adj(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            Formula::Forall(_, f) | Formula::Exists(_, f) => 1 + f.quantifier_depth(),
        }
    }

    /// Total number of quantifier occurrences.
    pub fn quantifier_count(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Eq(..) | Formula::Adj(..) => 0,
            Formula::Not(f) => f.quantifier_count(),
            Formula::And(a, b) | Formula::Or(a, b) => a.quantifier_count() + b.quantifier_count(),
            Formula::Forall(_, f) | Formula::Exists(_, f) => 1 + f.quantifier_count(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        fn go(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
            match f {
                Formula::Const(_) => {}
                Formula::Eq(x, y) | Formula::Adj(x, y) => {
                    for v in [x, y] {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                Formula::Not(g) => go(g, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Forall(x, g) | Formula::Exists(x, g) => {
                    bound.push(x.clone());
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    fn all_names(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Const(_) => {}
            Formula::Eq(x, y) | Formula::Adj(x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Formula::Not(g) => g.all_names(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                out.insert(x.clone());
                g.all_names(out);
            }
        }
    }

    /// Renames binders so that no variable name is bound twice. The first
    /// binder of each name keeps it; later ones get `name_1`, `name_2`, ...
    fn rename_apart(&self) -> Formula {
        struct Renamer {
            used: BTreeSet<Var>,
            bound_once: BTreeSet<Var>,
            scope: Vec<(Var, Var)>,
        }
        impl Renamer {
            fn lookup(&self, v: &Var) -> Var {
                self.scope
                    .iter()
                    .rev()
                    .find(|(orig, _)| orig == v)
                    .map(|(_, new)| new.clone())
                    .unwrap_or_else(|| v.clone())
            }
            fn fresh(&mut self, base: &str) -> Var {
                if self.bound_once.insert(base.to_string()) {
                    return base.to_string();
                }
                let mut i = 1;
                loop {
                    let cand = format!("{base}_{i}");
                    if !self.used.contains(&cand) {
                        self.used.insert(cand.clone());
                        return cand;
                    }
                    i += 1;
                }
            }
            fn go(&mut self, f: &Formula) -> Formula {
                match f {
                    Formula::Const(b) => Formula::Const(*b),
                    Formula::Eq(x, y) => Formula::Eq(self.lookup(x), self.lookup(y)),
                    Formula::Adj(x, y) => Formula::Adj(self.lookup(x), self.lookup(y)),
                    Formula::Not(g) => Formula::not(self.go(g)),
                    Formula::And(a, b) => Formula::and(self.go(a), self.go(b)),
                    Formula::Or(a, b) => Formula::or(self.go(a), self.go(b)),
                    Formula::Forall(x, g) | Formula::Exists(x, g) => {
                        let q = if matches!(f, Formula::Forall(..)) {
                            Quantifier::Forall
                        } else {
                            Quantifier::Exists
                        };
                        let new = self.fresh(x);
                        self.scope.push((x.clone(), new.clone()));
                        let body = self.go(g);
                        self.scope.pop();
                        Formula::quantified(q, new, body)
                    }
                }
            }
        }
        let mut used = BTreeSet::new();
        self.all_names(&mut used);
        let mut r = Renamer { used, bound_once: self.free_vars(), scope: Vec::new() };
        r.go(self)
    }

    /// Splits a formula with distinct binder names into a quantifier prefix and
    /// a quantifier-free matrix.
    fn pull_quantifiers(&self) -> (Vec<(Quantifier, Var)>, Formula) {
        match self {
            Formula::Const(_) | Formula::Eq(..) | Formula::Adj(..) => (Vec::new(), self.clone()),
            Formula::Not(g) => {
                let (prefix, m) = g.pull_quantifiers();
                (prefix.into_iter().map(|(q, x)| (q.flip(), x)).collect(), Formula::not(m))
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let (mut pa, ma) = a.pull_quantifiers();
                let (pb, mb) = b.pull_quantifiers();
                pa.extend(pb);
                let m = if matches!(self, Formula::And(..)) {
                    Formula::and(ma, mb)
                } else {
                    Formula::or(ma, mb)
                };
                (pa, m)
            }
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                let q = if matches!(self, Formula::Forall(..)) {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let (mut prefix, m) = g.pull_quantifiers();
                prefix.insert(0, (q, x.clone()));
                (prefix, m)
            }
        }
    }

    /// Prenex normal form: quantifier prefix and quantifier-free matrix.
    ///
    /// Equivalent to `self` on every non-empty structure. The number of
    /// quantifiers is preserved.
    pub fn prenex_parts(&self) -> (Vec<(Quantifier, Var)>, Formula) {
        self.rename_apart().pull_quantifiers()
    }

    pub fn to_prenex(&self) -> Formula {
        let (prefix, matrix) = self.prenex_parts();
        prefix
            .into_iter()
            .rev()
            .fold(matrix, |acc, (q, x)| Formula::quantified(q, x, acc))
    }

    /// True iff the prenex form has only existential quantifiers.
    pub fn is_existential(&self) -> bool {
        self.prenex_parts().0.iter().all(|(q, _)| *q == Quantifier::Exists)
    }

    /// Binds tighter than any binary connective.
    fn is_atomic(&self) -> bool {
        match self {
            Formula::Const(_) | Formula::Eq(..) | Formula::Adj(..) => true,
            Formula::Not(g) => g.is_atomic(),
            _ => false,
        }
    }

    /// Ends in a quantifier whose scope would swallow anything printed after it.
    fn extends_right(&self) -> bool {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => true,
            Formula::Not(g) => g.extends_right(),
            _ => false,
        }
    }

    /// Prints `self`; `tail` tells whether nothing follows at this level.
    fn write(&self, f: &mut fmt::Formatter<'_>, tail: bool) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
            f.write_str("(")?;
            g.write(f, true)?;
            f.write_str(")")
        }
        match self {
            Formula::Const(true) => f.write_str("true"),
            Formula::Const(false) => f.write_str("false"),
            Formula::Eq(x, y) => write!(f, "{x} = {y}"),
            Formula::Adj(x, y) => write!(f, "{x} ~ {y}"),
            Formula::Not(g) => match g.as_ref() {
                Formula::Not(_) | Formula::Const(_) => {
                    f.write_str("!")?;
                    g.write(f, tail)
                }
                Formula::Forall(..) | Formula::Exists(..) if tail => {
                    f.write_str("!")?;
                    g.write(f, tail)
                }
                _ => {
                    f.write_str("!")?;
                    paren(f, g)
                }
            },
            Formula::And(a, b) | Formula::Or(a, b) => {
                let and = matches!(self, Formula::And(..));
                let chain = if and { matches!(a.as_ref(), Formula::And(..)) } else { matches!(a.as_ref(), Formula::Or(..)) };
                if chain || (a.is_atomic() && !a.extends_right()) {
                    a.write(f, false)?;
                } else {
                    paren(f, a)?;
                }
                f.write_str(if and { " & " } else { " | " })?;
                if (b.is_atomic() && !b.extends_right()) || (tail && b.extends_right()) {
                    b.write(f, tail)
                } else {
                    paren(f, b)
                }
            }
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                let kw = if matches!(self, Formula::Forall(..)) { "forall" } else { "exists" };
                write!(f, "{kw} {x} ")?;
                match g.as_ref() {
                    Formula::And(..) | Formula::Or(..) => paren(f, g),
                    _ => g.write(f, tail),
                }
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, true)
    }
}

/// A closed formula, compiled for evaluation.
#[derive(Clone, Debug)]
pub struct Sentence {
    formula: Formula,
    compiled: eval::Compiled,
    slots: usize,
}

impl PartialEq for Sentence {
    fn eq(&self, other: &Self) -> bool {
        self.formula == other.formula
    }
}

impl Sentence {
    pub fn new(formula: Formula) -> Result<Self, LogicError> {
        if let Some(v) = formula.free_vars().into_iter().next() {
            return Err(LogicError::Unbound(v));
        }
        let (compiled, slots) = eval::compile(&formula, &[]);
        Ok(Sentence { formula, compiled, slots })
    }

    pub fn parse(text: &str) -> Result<Self, LogicError> {
        Sentence::new(parse_formula(text)?)
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn quantifier_depth(&self) -> usize {
        self.formula.quantifier_depth()
    }

    pub fn to_prenex(&self) -> Sentence {
        Sentence::new(self.formula.to_prenex()).expect("prenexing keeps sentences closed")
    }

    pub fn is_existential(&self) -> bool {
        self.formula.is_existential()
    }

    pub fn evaluate(&self, s: &impl Structure) -> bool {
        let mut env = vec![0usize; self.slots];
        eval::run(&self.compiled, s, &mut env)
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.formula.fmt(f)
    }
}

/// Sentences used throughout tests and examples.
pub mod corpus {
    pub const TRIANGLE: &str = "exists x exists y exists z (x ~ y & y ~ z & x ~ z)";
    pub const DIAMETER_TWO: &str = "forall x forall y (x = y | x ~ y | exists z (x ~ z & z ~ y))";
    pub const DOMINATING: &str = "exists x forall y (x = y | x ~ y)";
    pub const CLIQUE: &str = "forall x forall y (x = y | x ~ y)";
    pub const SINGLETON: &str = "forall x forall y x = y";
}
