//! Valued structures, τ-expressions and the operators of valued relational clones.

mod expr;
mod ops;
mod relation;
mod structure;

use alloc::string::String;

pub use expr::{evaluate, ExprAtom, Instance, TauExpression};
pub use ops::{
    apply_clone_operator, averaged_power, dual_to_valued, express, power_element_name, pp_power, zero_tuples,
    CloneOp, PpDefinition,
};
pub use relation::{decode, decode_into, encode, tuple_count, ValuedRelation};
pub use structure::ValuedStructure;

use crate::cost::Rational;

/// Name of the built-in binary equality relation (0 on equal pairs, ∞ else).
pub const EQUALITY_NAME: &str = "=";
/// Name of the built-in unary empty relation (∞ everywhere).
pub const EMPTY_NAME: &str = "empty";

/// The relation an atom refers to: a signature symbol or a built-in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelRef {
    Symbol(usize),
    Equality,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VcspError {
    #[error("scale factor {0} is negative")]
    NegativeScale(Rational),
    #[error("`{symbol}` has arity {expected}, got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("table of `{symbol}` is over {found} elements, domain has {expected}")]
    DomainMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} relations, got {found}")]
    RelationCount { expected: usize, found: usize },
    #[error("`{0}` is reserved for a built-in relation")]
    ReservedName(String),
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("variable index {0} is out of range")]
    VariableOutOfRange(usize),
    #[error("malformed atom `{0}`")]
    Syntax(String),
    #[error("power dimension must be positive")]
    ZeroDimension,
}
