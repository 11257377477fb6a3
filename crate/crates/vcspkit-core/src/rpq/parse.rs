use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Rpq, RpqError, RpqExpr};
use crate::query::Signature;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Inverse,
    Union,
    Concat,
    Star,
    Open,
    Close,
    Epsilon,
    Empty,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, RpqError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some((at, c)) = it.next() {
        let tok = match c {
            c if c.is_whitespace() => continue,
            '+' | '|' => Tok::Union,
            ';' | '.' => Tok::Concat,
            '*' => Tok::Star,
            '(' => Tok::Open,
            ')' => Tok::Close,
            'ε' => Tok::Epsilon,
            '∅' => Tok::Empty,
            '⁻' => Tok::Inverse,
            '^' => match it.next() {
                Some((_, '-')) => Tok::Inverse,
                _ => {
                    return Err(RpqError::Syntax {
                        at,
                        message: "expected `^-`".to_string(),
                    })
                }
            },
            c if c.is_alphanumeric() || c == '_' => {
                let mut name = String::from(c);
                while let Some(&(_, d)) = it.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        name.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                Tok::Ident(name)
            }
            other => {
                return Err(RpqError::Syntax {
                    at,
                    message: alloc::format!("unexpected `{other}`"),
                })
            }
        };
        out.push((at, tok));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    sig: &'a Signature,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(a, _)| *a)
    }

    fn error(&self, message: &str) -> RpqError {
        RpqError::Syntax {
            at: self.at(),
            message: message.to_string(),
        }
    }

    fn union(&mut self) -> Result<RpqExpr, RpqError> {
        let mut left = self.concat()?;
        while self.peek() == Some(&Tok::Union) {
            self.pos += 1;
            left = RpqExpr::union(left, self.concat()?);
        }
        Ok(left)
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(_) | Tok::Open | Tok::Epsilon | Tok::Empty))
    }

    fn concat(&mut self) -> Result<RpqExpr, RpqError> {
        let mut left = self.postfix()?;
        loop {
            if self.peek() == Some(&Tok::Concat) {
                self.pos += 1;
            } else if !self.starts_atom() {
                return Ok(left);
            }
            left = RpqExpr::concat(left, self.postfix()?);
        }
    }

    fn postfix(&mut self) -> Result<RpqExpr, RpqError> {
        let mut e = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    e = RpqExpr::star(e);
                }
                Some(Tok::Inverse) => match e {
                    RpqExpr::Symbol { rel, inverse } => {
                        self.pos += 1;
                        e = RpqExpr::Symbol { rel, inverse: !inverse };
                    }
                    _ => return Err(self.error("inverse applies to a relation symbol")),
                },
                _ => return Ok(e),
            }
        }
    }

    fn atom(&mut self) -> Result<RpqExpr, RpqError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("unexpected end of query"));
        };
        self.pos += 1;
        match tok {
            Tok::Epsilon => Ok(RpqExpr::Epsilon),
            Tok::Empty => Ok(RpqExpr::Empty),
            Tok::Open => {
                let e = self.union()?;
                if self.peek() != Some(&Tok::Close) {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Tok::Ident(name) => match self.sig.index_of(&name) {
                Some(rel) if self.sig.arity(rel) == 2 => Ok(RpqExpr::symbol(rel)),
                Some(_) => Err(RpqError::NotBinary(name)),
                None if name == "eps" => Ok(RpqExpr::Epsilon),
                None if name == "empty" => Ok(RpqExpr::Empty),
                None => Err(RpqError::UnknownSymbol(name)),
            },
            _ => {
                self.pos -= 1;
                Err(self.error("expected a symbol, `(`, `ε` or `∅`"))
            }
        }
    }
}

/// Parses with star binding tightest, then concatenation (`;`, `.` or
/// juxtaposition), then union (`+` or `|`). `R^-` or `R⁻` is the inverse of
/// `R`; `ε`/`eps` and `∅`/`empty` are the empty word and the empty language
/// unless declared as relations.
pub fn parse_rpq(text: &str, sig: &Signature) -> Result<Rpq, RpqError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
        sig,
    };
    let e = p.union()?;
    if p.pos != p.toks.len() {
        return Err(p.error("unexpected token"));
    }
    Rpq::new(sig.clone(), e)
}

/// Parses with every identifier other than the keywords declared as a
/// binary symbol, in order of first occurrence.
pub fn parse_rpq_symbols(text: &str) -> Result<Rpq, RpqError> {
    let mut sig = Signature::new();
    for (_, t) in lex(text)? {
        if let Tok::Ident(name) = t {
            if name != "eps" && name != "empty" && sig.index_of(&name).is_none() {
                sig.add(&name, 2).map_err(|_| RpqError::UnknownSymbol(name.clone()))?;
            }
        }
    }
    parse_rpq(text, &sig)
}
