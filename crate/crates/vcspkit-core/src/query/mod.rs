//! Conjunctive queries, unions of them, and finite relational structures.

mod cq;
mod hom;
mod parse;
mod signature;
mod structure;

use alloc::string::String;
use alloc::vec::Vec;

pub use cq::{Atom, ConjunctiveQuery, UnionQuery};
pub(crate) use cq::UnionFind;
pub use hom::{core_of, enumerate_homomorphisms, find_homomorphism, has_homomorphism};
pub use parse::{parse_query_file, parse_union_query, Position, QueryFile};
pub use signature::{Signature, Symbol};
pub use structure::RelationalStructure;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("{at}: syntax error: {message}")]
    Syntax { at: Position, message: String },
    #[error("{at}: unknown relation `{name}`")]
    UnknownRelation { at: Position, name: String },
    #[error("{at}: relation `{name}` has arity {expected} but is used with {found}")]
    ArityMismatch {
        at: Position,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{at}: rule head `{other}` differs from `{first}`")]
    MixedHeads {
        at: Position,
        first: String,
        other: String,
    },
    #[error("unknown relation `{0}`")]
    UnknownSymbol(String),
    #[error("tuple for `{relation}` has {found} entries, expected {expected}")]
    TupleArity {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("element index {0} is out of range")]
    ElementOutOfRange(usize),
    #[error("duplicate relation `{0}`")]
    DuplicateRelation(String),
    #[error("relation `{0}` must have positive arity")]
    ZeroArity(String),
    #[error("variable `{0}` occurs in no atom")]
    UnusedVariable(String),
    #[error("a conjunctive query needs at least one atom")]
    NoAtoms,
    #[error("the query text contains no rules")]
    EmptyUnion,
    #[error("expected a single conjunctive query")]
    NotConjunctive,
    #[error("disjuncts use different signatures")]
    SignatureMismatch,
}

/// Structural facts about a conjunctive query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructureReport {
    pub connected: bool,
    /// The variable/atom incidence multigraph has no cycle. A variable repeated
    /// inside one atom gives two parallel edges, which count as a cycle.
    pub incidence_acyclic: bool,
    /// Every two distinct variables occur together in some atom.
    pub gaifman_complete: bool,
}

pub fn analyze(cq: &ConjunctiveQuery) -> StructureReport {
    let n = cq.num_vars();
    let db = cq.canonical_database();

    let mut vars = UnionFind::new(n);
    for (_, t) in db.facts() {
        for w in t.windows(2) {
            vars.union(w[0], w[1]);
        }
    }
    let connected = (1..n).all(|v| vars.find(v) == vars.find(0));

    // Vertices: variables, then one per fact.
    let mut inc = UnionFind::new(n + db.fact_count());
    let mut incidence_acyclic = true;
    for (i, (_, t)) in db.facts().enumerate() {
        for &v in t {
            if !inc.union(v, n + i) {
                incidence_acyclic = false;
            }
        }
    }

    let mut adjacent = alloc::vec![alloc::vec![false; n]; n];
    for (_, t) in db.facts() {
        for &a in t {
            for &b in t {
                adjacent[a][b] = true;
            }
        }
    }
    let gaifman_complete = (0..n).all(|a| (0..n).all(|b| a == b || adjacent[a][b]));

    StructureReport {
        connected,
        incidence_acyclic,
        gaifman_complete,
    }
}

/// Element names of a structure as string slices, handy for messages.
pub fn element_names(s: &RelationalStructure, tuple: &[usize]) -> Vec<String> {
    tuple.iter().map(|&e| s.elements()[e].clone()).collect()
}
