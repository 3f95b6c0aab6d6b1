//! Exhaustive Ehrenfeucht–Fraïssé games: decides whether two graphs agree on
//! every sentence of quantifier depth at most `k`.

use std::collections::HashMap;

use thiserror::Error;

use crate::generate::rng_for;
use crate::graph::Graph;
use crate::logic::{random_sentence, Sentence};

/// Default cap on explored positions.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EfError {
    #[error("undecided: explored {explored} positions, budget exhausted")]
    Undecided { explored: u64 },
}

/// A position of the game: pairs `(vertex of g, vertex of h)` played so far.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GamePosition {
    pub played: Vec<(usize, usize)>,
    pub rounds_left: usize,
}

impl GamePosition {
    /// Positions are compared as sets of pairs; order and repeats do not
    /// change the game value.
    fn canonical(&self) -> (Vec<(u16, u16)>, usize) {
        let mut p: Vec<(u16, u16)> = self.played.iter().map(|&(a, b)| (a as u16, b as u16)).collect();
        p.sort_unstable();
        p.dedup();
        (p, self.rounds_left)
    }
}

struct Game<'a> {
    g: &'a Graph,
    h: &'a Graph,
    memo: HashMap<(Vec<(u16, u16)>, usize), bool>,
    explored: u64,
    budget: u64,
}

impl Game<'_> {
    /// Whether adding `(a, b)` keeps the played map a partial isomorphism.
    fn extends(&self, played: &[(usize, usize)], a: usize, b: usize) -> bool {
        played.iter().all(|&(x, y)| (x == a) == (y == b) && self.g.adjacent(x, a) == self.h.adjacent(y, b))
    }

    fn duplicator_wins(&mut self, pos: &mut GamePosition) -> Result<bool, EfError> {
        if pos.rounds_left == 0 {
            return Ok(true);
        }
        self.explored += 1;
        if self.explored > self.budget {
            return Err(EfError::Undecided { explored: self.explored });
        }
        let key = pos.canonical();
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let result = self.spoiler_fails(pos, true)? && self.spoiler_fails(pos, false)?;
        self.memo.insert(key, result);
        Ok(result)
    }

    /// Tries every Spoiler move in one graph; true iff Duplicator survives all.
    fn spoiler_fails(&mut self, pos: &mut GamePosition, in_g: bool) -> Result<bool, EfError> {
        let (n_spoiler, n_dup) = if in_g { (self.g.len(), self.h.len()) } else { (self.h.len(), self.g.len()) };
        for s in 0..n_spoiler {
            // replaying a pebbled vertex cannot help Spoiler
            if pos.played.iter().any(|&(a, b)| if in_g { a == s } else { b == s }) {
                continue;
            }
            let mut answered = false;
            for d in 0..n_dup {
                let (a, b) = if in_g { (s, d) } else { (d, s) };
                if !self.extends(&pos.played, a, b) {
                    continue;
                }
                pos.played.push((a, b));
                pos.rounds_left -= 1;
                let ok = self.duplicator_wins(pos);
                pos.rounds_left += 1;
                pos.played.pop();
                if ok? {
                    answered = true;
                    break;
                }
            }
            if !answered {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Decides `g ≃_k h` by searching the `k`-round game, with the default budget.
pub fn ef_equivalent(g: &Graph, h: &Graph, k: usize) -> Result<bool, EfError> {
    ef_equivalent_with_budget(g, h, k, DEFAULT_BUDGET)
}

pub fn ef_equivalent_with_budget(g: &Graph, h: &Graph, k: usize, budget: u64) -> Result<bool, EfError> {
    let mut game = Game { g, h, memo: HashMap::new(), explored: 0, budget };
    game.duplicator_wins(&mut GamePosition { played: Vec::new(), rounds_left: k })
}

#[derive(Clone, Debug, Default)]
pub struct SampleReport {
    pub trials: usize,
    /// Sampled sentences with `(value on g, value on h)` where they differ.
    pub distinguishing: Vec<(Sentence, bool, bool)>,
}

impl SampleReport {
    pub fn is_empty(&self) -> bool {
        self.distinguishing.is_empty()
    }
}

/// Samples random sentences of quantifier depth at most `k` and reports the
/// ones that `g` and `h` disagree on.
pub fn sample_sentence_check(g: &Graph, h: &Graph, k: usize, trials: usize, seed: u64) -> SampleReport {
    let mut rng = rng_for(seed);
    let mut report = SampleReport { trials, distinguishing: Vec::new() };
    for _ in 0..trials {
        let s = random_sentence(&mut rng, k);
        let (a, b) = (s.evaluate(g), s.evaluate(h));
        if a != b {
            report.distinguishing.push((s, a, b));
        }
    }
    report
}
