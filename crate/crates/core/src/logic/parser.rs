use super::{Formula, LogicError};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Exists,
    Forall,
    True,
    False,
    LParen,
    RParen,
    Tilde,
    Eq,
    Neq,
    Bang,
    Amp,
    Bar,
    Arrow,
    Iff,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    word.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            let tok = match word.as_str() {
                "exists" => Tok::Exists,
                "forall" => Tok::Forall,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            };
            out.push((pos, tok));
            continue;
        }
        chars.next();
        let two = |chars: &mut std::iter::Peekable<std::str::CharIndices>, next: char| {
            if chars.peek().map(|&(_, c)| c) == Some(next) {
                chars.next();
                true
            } else {
                false
            }
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '~' | '−' => Tok::Tilde,
            '=' => Tok::Eq,
            '≠' => Tok::Neq,
            '!' | '¬' if two(&mut chars, '=') => Tok::Neq,
            '!' | '¬' => Tok::Bang,
            '&' | '∧' => Tok::Amp,
            '|' | '∨' => Tok::Bar,
            '∃' => Tok::Exists,
            '∀' => Tok::Forall,
            '-' if two(&mut chars, '>') => Tok::Arrow,
            '<' if two(&mut chars, '-') && two(&mut chars, '>') => Tok::Iff,
            _ => {
                return Err(LogicError::Syntax { pos, msg: format!("unexpected character `{c}`") })
            }
        };
        out.push((pos, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, LogicError> {
        Err(LogicError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, LogicError> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.at += 1;
                Ok(name)
            }
            _ => self.error("expected a variable"),
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.implication()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.implication()?;
            return Ok(Formula::and(
                Formula::or(Formula::not(lhs.clone()), rhs.clone()),
                Formula::or(Formula::not(rhs), lhs),
            ));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Formula::or(Formula::not(lhs), rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::Amp) {
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.at += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Exists) | Some(Tok::Forall) => {
                let exists = self.peek() == Some(&Tok::Exists);
                self.at += 1;
                let x = self.ident()?;
                let body = self.formula()?;
                Ok(if exists { Formula::Exists(x, Box::new(body)) } else { Formula::Forall(x, Box::new(body)) })
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let f = self.formula()?;
                if !self.eat(&Tok::RParen) {
                    return self.error("expected `)`");
                }
                Ok(f)
            }
            Some(Tok::True) => {
                self.at += 1;
                Ok(Formula::Const(true))
            }
            Some(Tok::False) => {
                self.at += 1;
                Ok(Formula::Const(false))
            }
            Some(Tok::Ident(_)) => {
                let x = self.ident()?;
                let op = self.peek().cloned();
                match op {
                    Some(Tok::Eq) | Some(Tok::Tilde) | Some(Tok::Neq) => self.at += 1,
                    _ => return self.error("expected `=`, `!=` or `~`"),
                }
                let y = self.ident()?;
                Ok(match op {
                    Some(Tok::Eq) => Formula::Eq(x, y),
                    Some(Tok::Neq) => Formula::not(Formula::Eq(x, y)),
                    _ => Formula::Adj(x, y),
                })
            }
            Some(_) => self.error("unexpected token"),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses the concrete syntax:
/// `x = y`, `x ~ y`, `x != y`, `!F`, `F & F`, `F | F`, `F -> F`, `F <-> F`,
/// `exists x F`, `forall x F`, `true`, `false`, parentheses.
///
/// `!` binds tightest, then `&`, `|`, `->` (right associative), `<->`.
/// A quantifier's body extends as far right as possible. Implication and
/// equivalence are desugared into `!`, `&` and `|`.
pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, end: text.len() };
    let f = p.formula()?;
    if p.at != p.toks.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::corpus;

    #[test]
    fn parses_triangle() {
        let f = parse_formula(corpus::TRIANGLE).unwrap();
        let expected = Formula::exists(
            "x",
            Formula::exists(
                "y",
                Formula::exists(
                    "z",
                    Formula::and(
                        Formula::and(Formula::adj("x", "y"), Formula::adj("y", "z")),
                        Formula::adj("x", "z"),
                    ),
                ),
            ),
        );
        assert_eq!(f, expected);
        assert_eq!(f.to_string(), corpus::TRIANGLE);
    }

    #[test]
    fn printer_round_trips_corpus() {
        for text in [corpus::DIAMETER_TWO, corpus::DOMINATING, corpus::CLIQUE, corpus::SINGLETON] {
            let f = parse_formula(text).unwrap();
            assert_eq!(f.to_string(), text);
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn unicode_aliases() {
        let a = parse_formula("∃x∀y (x = y ∨ x − y)").unwrap();
        assert_eq!(a, parse_formula(corpus::DOMINATING).unwrap());
    }

    #[test]
    fn desugars_implication() {
        let f = parse_formula("forall x (x = x -> x ~ x)").unwrap();
        assert_eq!(f.to_string(), "forall x (!(x = x) | x ~ x)");
        let f = parse_formula("x != y").unwrap();
        assert_eq!(f, Formula::not(Formula::eq("x", "y")));
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse_formula("exists x x = x & x ~ x").unwrap();
        assert!(matches!(f, Formula::Exists(_, ref b) if matches!(**b, Formula::And(..))));
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(
            parse_formula("exists x (x ~ y").unwrap_err(),
            LogicError::Syntax { pos: 15, msg: "expected `)`".into() }
        );
        assert!(matches!(parse_formula("x ~"), Err(LogicError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_formula("x $ y"), Err(LogicError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_formula("x = y y"), Err(LogicError::Syntax { .. })));
    }
}
