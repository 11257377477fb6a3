use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{Rpq, RpqError, RpqExpr};
use crate::query::Signature;
use crate::resilience::BagDatabase;

/// Start or end marker of a subexpression, by its preorder index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MdPredicate {
    Start(usize),
    End(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BodyAtom {
    True(usize),
    Unary(MdPredicate, usize),
    Edge { rel: usize, from: usize, to: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MdHead {
    Unary(MdPredicate, usize),
    Goal,
}

/// One rule over the variables `x` (0) and `y` (1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdRule {
    pub head: MdHead,
    pub body: Vec<BodyAtom>,
}

/// A Boolean monadic Datalog program over binary relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MDLogProgram {
    pub signature: Signature,
    pub rules: Vec<MdRule>,
}

const X: usize = 0;
const Y: usize = 1;

fn unary(p: MdPredicate, v: usize) -> BodyAtom {
    BodyAtom::Unary(p, v)
}

fn copy(from: MdPredicate, to: MdPredicate) -> MdRule {
    MdRule {
        head: MdHead::Unary(to, X),
        body: alloc::vec![unary(from, X)],
    }
}

/// The inductive rules for every subexpression, with `true(x) → S(x)` for
/// the whole query and `E(x) → goal()`.
pub fn rpq_to_mdlog(q: &Rpq) -> MDLogProgram {
    use MdPredicate::{End, Start};
    let subs = q.expr().subexpressions();
    let index = |e: &RpqExpr| subs.iter().position(|s| core::ptr::eq(*s, e)).expect("own subexpression");
    let mut rules = Vec::new();
    for (i, e) in subs.iter().enumerate() {
        match e {
            RpqExpr::Empty => {}
            RpqExpr::Epsilon => rules.push(copy(Start(i), End(i))),
            RpqExpr::Symbol { rel, inverse } => {
                let (head, start) = if *inverse { (X, Y) } else { (Y, X) };
                rules.push(MdRule {
                    head: MdHead::Unary(End(i), head),
                    body: alloc::vec![unary(Start(i), start), BodyAtom::Edge { rel: *rel, from: X, to: Y }],
                });
            }
            RpqExpr::Concat(a, b) => {
                let (a, b) = (index(a), index(b));
                rules.push(copy(Start(i), Start(a)));
                rules.push(copy(End(a), Start(b)));
                rules.push(copy(End(b), End(i)));
            }
            RpqExpr::Union(a, b) => {
                for c in [index(a), index(b)] {
                    rules.push(copy(Start(i), Start(c)));
                    rules.push(copy(End(c), End(i)));
                }
            }
            RpqExpr::Star(a) => {
                let a = index(a);
                rules.push(copy(Start(i), End(i)));
                rules.push(copy(Start(i), Start(a)));
                rules.push(copy(End(a), Start(i)));
            }
        }
    }
    rules.push(MdRule {
        head: MdHead::Unary(Start(0), X),
        body: alloc::vec![BodyAtom::True(X)],
    });
    rules.push(MdRule {
        head: MdHead::Goal,
        body: alloc::vec![unary(End(0), X)],
    });
    MDLogProgram {
        signature: q.signature().clone(),
        rules,
    }
}

fn atom_vars(a: &BodyAtom) -> Vec<usize> {
    match a {
        BodyAtom::True(v) | BodyAtom::Unary(_, v) => alloc::vec![*v],
        BodyAtom::Edge { from, to, .. } => alloc::vec![*from, *to],
    }
}

impl MDLogProgram {
    /// Every body is connected and has at most one relation atom, whose
    /// variables are distinct; heads use body variables.
    pub fn is_simple(&self) -> bool {
        self.rules.iter().all(|r| {
            let edges: Vec<&BodyAtom> = r.body.iter().filter(|a| matches!(a, BodyAtom::Edge { .. })).collect();
            let distinct = edges
                .iter()
                .all(|a| matches!(a, BodyAtom::Edge { from, to, .. } if from != to));
            let vars: BTreeSet<usize> = r.body.iter().flat_map(atom_vars).collect();
            let connected = vars.len() <= 1 || !edges.is_empty();
            let head_ok = match r.head {
                MdHead::Unary(_, v) => vars.contains(&v),
                MdHead::Goal => true,
            };
            edges.len() <= 1 && distinct && connected && head_ok && !r.body.is_empty()
        })
    }

    /// Naive bottom-up evaluation; whether `goal()` is derived. Relations
    /// are matched by name and must be binary.
    pub fn derives_goal(&self, db: &BagDatabase) -> Result<bool, RpqError> {
        let n = db.size();
        let mut rel_map = Vec::new();
        for k in 0..self.signature.len() {
            let name = self.signature.name(k);
            rel_map.push(match db.signature().index_of(name) {
                Some(r) if db.signature().arity(r) == 2 => Some(r),
                Some(_) => return Err(RpqError::DatabaseArity(name.to_string())),
                None => None,
            });
        }
        let mut facts: BTreeSet<(MdPredicate, usize)> = BTreeSet::new();
        loop {
            let mut added = false;
            for rule in &self.rules {
                for x in 0..n {
                    for y in 0..n {
                        let val = [x, y];
                        let body = rule.body.iter().all(|a| match a {
                            BodyAtom::True(_) => true,
                            BodyAtom::Unary(p, v) => facts.contains(&(*p, val[*v])),
                            BodyAtom::Edge { rel, from, to } => {
                                rel_map[*rel].is_some_and(|r| db.multiplicity(r, &[val[*from], val[*to]]) > 0)
                            }
                        });
                        if !body {
                            continue;
                        }
                        match rule.head {
                            MdHead::Goal => return Ok(true),
                            MdHead::Unary(p, v) => added |= facts.insert((p, val[v])),
                        }
                    }
                }
            }
            if !added {
                return Ok(false);
            }
        }
    }
}

fn pred_name(p: MdPredicate) -> String {
    match p {
        MdPredicate::Start(i) => alloc::format!("S{i}"),
        MdPredicate::End(i) => alloc::format!("E{i}"),
    }
}

const VAR_NAMES: [&str; 2] = ["x", "y"];

impl fmt::Display for MDLogProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            let body: Vec<String> = r
                .body
                .iter()
                .map(|a| match a {
                    BodyAtom::True(v) => alloc::format!("true({})", VAR_NAMES[*v]),
                    BodyAtom::Unary(p, v) => alloc::format!("{}({})", pred_name(*p), VAR_NAMES[*v]),
                    BodyAtom::Edge { rel, from, to } => alloc::format!(
                        "{}({},{})",
                        self.signature.name(*rel),
                        VAR_NAMES[*from],
                        VAR_NAMES[*to]
                    ),
                })
                .collect();
            let head = match r.head {
                MdHead::Goal => "goal()".to_string(),
                MdHead::Unary(p, v) => alloc::format!("{}({})", pred_name(p), VAR_NAMES[v]),
            };
            writeln!(f, "{} -> {}", body.join(" & "), head)?;
        }
        Ok(())
    }
}
