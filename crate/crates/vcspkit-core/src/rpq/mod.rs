//! Two-way regular path queries: parsing, evaluation through an automaton,
//! translation into simple monadic Datalog, and exact resilience.

mod datalog;
mod nfa;
mod parse;
mod solve;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::query::Signature;
use crate::resilience::BagDatabase;

pub use datalog::{rpq_to_mdlog, BodyAtom, MDLogProgram, MdHead, MdPredicate, MdRule};
pub use nfa::{Label, Nfa};
pub use parse::{parse_rpq, parse_rpq_symbols};
pub use solve::{rpq_resilience, RpqResilience};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RpqError {
    #[error("offset {at}: {message}")]
    Syntax { at: usize, message: String },
    #[error("unknown relation `{0}`")]
    UnknownSymbol(String),
    #[error("relation `{0}` is not binary")]
    NotBinary(String),
    #[error("path relation `{0}` is stored with arity other than 2")]
    DatabaseArity(String),
}

/// A regular expression over the relation symbols and their inverses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RpqExpr {
    Empty,
    Epsilon,
    Symbol { rel: usize, inverse: bool },
    Union(Box<RpqExpr>, Box<RpqExpr>),
    Concat(Box<RpqExpr>, Box<RpqExpr>),
    Star(Box<RpqExpr>),
}

impl RpqExpr {
    pub fn symbol(rel: usize) -> RpqExpr {
        RpqExpr::Symbol { rel, inverse: false }
    }

    pub fn inverse(rel: usize) -> RpqExpr {
        RpqExpr::Symbol { rel, inverse: true }
    }

    pub fn union(a: RpqExpr, b: RpqExpr) -> RpqExpr {
        RpqExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn concat(a: RpqExpr, b: RpqExpr) -> RpqExpr {
        RpqExpr::Concat(Box::new(a), Box::new(b))
    }

    pub fn star(a: RpqExpr) -> RpqExpr {
        RpqExpr::Star(Box::new(a))
    }

    /// Subexpressions in preorder, the expression itself first.
    pub fn subexpressions(&self) -> Vec<&RpqExpr> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(e) = stack.pop() {
            out.push(e);
            match e {
                RpqExpr::Union(a, b) | RpqExpr::Concat(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                RpqExpr::Star(a) => stack.push(a),
                _ => {}
            }
        }
        out
    }
}

/// A Boolean two-way regular path query over binary relation symbols: true
/// on a database when some path's label lies in the language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rpq {
    signature: Signature,
    expr: RpqExpr,
}

impl Rpq {
    /// All symbols must be binary and in range.
    pub fn new(signature: Signature, expr: RpqExpr) -> Result<Rpq, RpqError> {
        for e in expr.subexpressions() {
            if let RpqExpr::Symbol { rel, .. } = e {
                if *rel >= signature.len() {
                    return Err(RpqError::UnknownSymbol(alloc::format!("#{rel}")));
                }
                if signature.arity(*rel) != 2 {
                    return Err(RpqError::NotBinary(signature.name(*rel).into()));
                }
            }
        }
        Ok(Rpq { signature, expr })
    }

    pub fn parse(text: &str, signature: &Signature) -> Result<Rpq, RpqError> {
        parse_rpq(text, signature)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn expr(&self) -> &RpqExpr {
        &self.expr
    }

    pub fn nfa(&self) -> Nfa {
        Nfa::from_expr(&self.expr)
    }

    /// Whether some path of the database matches.
    pub fn holds_in(&self, db: &BagDatabase) -> Result<bool, RpqError> {
        Ok(solve::shortest_witness(db, self, &[])?.is_some())
    }

    fn fmt_expr(&self, e: &RpqExpr, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, open) = match e {
            RpqExpr::Union(..) => (0, prec > 0),
            RpqExpr::Concat(..) => (1, prec > 1),
            _ => (2, false),
        };
        if open {
            f.write_str("(")?;
        }
        match e {
            RpqExpr::Empty => f.write_str("∅")?,
            RpqExpr::Epsilon => f.write_str("ε")?,
            RpqExpr::Symbol { rel, inverse } => {
                f.write_str(self.signature.name(*rel))?;
                if *inverse {
                    f.write_str("^-")?;
                }
            }
            RpqExpr::Union(a, b) => {
                self.fmt_expr(a, p, f)?;
                f.write_str("+")?;
                self.fmt_expr(b, p + 1, f)?;
            }
            RpqExpr::Concat(a, b) => {
                self.fmt_expr(a, p, f)?;
                f.write_str(";")?;
                self.fmt_expr(b, p + 1, f)?;
            }
            RpqExpr::Star(a) => {
                self.fmt_expr(a, 3, f)?;
                f.write_str("*")?;
            }
        }
        if open {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Rpq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_expr(&self.expr, 0, f)
    }
}

/// All answers: pairs `(a, b)` joined by a path from `a` to `b` whose label
/// is in the language. Database relations are matched to the query's
/// symbols by name; missing ones are empty.
pub fn evaluate_rpq(db: &BagDatabase, q: &Rpq) -> Result<BTreeSet<(usize, usize)>, RpqError> {
    let graph = solve::PathGraph::new(db, q)?;
    let nfa = q.nfa();
    let n = db.size();
    let s = nfa.num_states();
    let mut answers = BTreeSet::new();
    for a in 0..n {
        let mut seen = alloc::vec![false; n * s];
        let mut stack: Vec<(usize, usize)> = nfa.initial().iter().map(|&st| (a, st)).collect();
        for &(e, st) in &stack {
            seen[e * s + st] = true;
        }
        while let Some((e, st)) = stack.pop() {
            if nfa.is_final(st) {
                answers.insert((a, e));
            }
            for &(label, to) in nfa.transitions_from(st) {
                for &(next, _) in graph.steps(e, label) {
                    if !seen[next * s + to] {
                        seen[next * s + to] = true;
                        stack.push((next, to));
                    }
                }
            }
        }
    }
    Ok(answers)
}
