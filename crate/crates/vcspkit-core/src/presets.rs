//! Small structures and queries used throughout the examples and tests.

use alloc::vec::Vec;

use crate::cost::Cost;
use crate::query::{ConjunctiveQuery, RelationalStructure, Signature};
use crate::vcsp::{RelRef, TauExpression, ValuedRelation, ValuedStructure};

fn order_relation(f: fn(usize, usize) -> bool) -> ValuedRelation {
    ValuedRelation::from_fn(2, 2, |t| if f(t[0], t[1]) { Cost::zero() } else { Cost::one() })
}

/// `<` on {0,1}: cost 0 on (0,1) and 1 elsewhere. Its VCSP is directed max-cut.
pub fn gamma_lt() -> ValuedStructure {
    ValuedStructure::from_relations(2, [("<", order_relation(|a, b| a < b))]).expect("valid preset")
}

/// `>=` on {0,1}: cost 0 when x ≥ y and 1 otherwise. Its VCSP is directed min-cut.
pub fn gamma_ge() -> ValuedStructure {
    ValuedStructure::from_relations(2, [(">=", order_relation(|a, b| a >= b))]).expect("valid preset")
}

/// The directed cycle `R(x0,x1) + … + R(x{n-1},x0)` over the first symbol.
pub fn directed_cycle(n: usize) -> TauExpression {
    let mut e = TauExpression::with_vars(n);
    for i in 0..n {
        e.push(RelRef::Symbol(0), alloc::vec![i, (i + 1) % n]);
    }
    e
}

/// Not-all-equal on {0,1} as a 0/∞ relation.
pub fn nae() -> ValuedRelation {
    ValuedRelation::from_fn(3, 2, |t| {
        if t[0] == t[1] && t[1] == t[2] {
            Cost::Infinite
        } else {
            Cost::zero()
        }
    })
}

fn cq(text: &str, symbols: &[(&str, usize)]) -> ConjunctiveQuery {
    let sig = Signature::from_symbols(symbols.iter().copied()).expect("valid preset signature");
    ConjunctiveQuery::parse(text, &sig).expect("valid preset query")
}

/// `R(x,y), S(y,z)`: the query with a finite dual.
pub fn path_query() -> ConjunctiveQuery {
    cq("R(x,y), S(y,z)", &[("R", 2), ("S", 2)])
}

/// Dual of [`path_query`]: R = {(0,1),(1,1)}, S = {(0,0),(0,1)}.
pub fn path_query_dual() -> RelationalStructure {
    let sig = path_query().signature().clone();
    let mut b = RelationalStructure::with_size(sig, 2);
    for (rel, t) in [("R", [0, 1]), ("R", [1, 1]), ("S", [0, 0]), ("S", [0, 1])] {
        let r = b.signature().index_of(rel).expect("preset symbol");
        b.add_tuple(r, t.to_vec()).expect("preset tuple");
    }
    b
}

/// `R(x,y), S(x,y,z)`: incidence-cyclic, so it has no finite dual.
pub fn linear_query() -> ConjunctiveQuery {
    cq("R(x,y), S(x,y,z)", &[("R", 2), ("S", 3)])
}

/// `R(x,y), S(y,z), T(z,x)`.
pub fn triangle_query() -> ConjunctiveQuery {
    cq("R(x,y), S(y,z), T(z,x)", &[("R", 2), ("S", 2), ("T", 2)])
}

/// `R(x,y), R(y,x)`: a directed 2-cycle (or loop).
pub fn two_cycle_query() -> ConjunctiveQuery {
    cq("R(x,y), R(y,x)", &[("R", 2)])
}

/// `S(x), R(x,y), R(y,x), R(y,y)`.
pub fn loop_query() -> ConjunctiveQuery {
    cq("S(x), R(x,y), R(y,x), R(y,y)", &[("R", 2), ("S", 1)])
}

/// The five-query corpus with short names.
pub fn corpus() -> Vec<(&'static str, ConjunctiveQuery)> {
    alloc::vec![
        ("path", path_query()),
        ("linear", linear_query()),
        ("triangle", triangle_query()),
        ("two-cycle", two_cycle_query()),
        ("loop", loop_query()),
    ]
}
