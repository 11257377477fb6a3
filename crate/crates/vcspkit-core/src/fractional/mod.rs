//! Fractional operations with finite support, the improvement test, and the
//! linear programs that search for fractional polymorphisms.

mod search;

use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::cost::{Cost, Rational};
use crate::lp::LpError;
use crate::vcsp::{decode_into, encode, tuple_count, ValuedRelation, ValuedStructure};

pub use search::{
    core_reduce, core_step, find_cyclic_fpol, siggers_in_support, siggers_weight, CoreReduction,
    DEFAULT_OPERATION_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FractionalError {
    #[error("{needed} operations exceed the cap of {cap}")]
    CapExceeded { needed: u128, cap: usize },
    #[error("arity must be at least {0}")]
    ArityTooSmall(usize),
    #[error("operation table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("operation value {0} is outside the domain")]
    ValueOutOfRange(usize),
    #[error("weights must be positive and sum to 1")]
    InvalidWeights,
    #[error("operations in a support must share arity and domain")]
    Mixed,
    #[error("scaled costs do not fit in 64-bit integers")]
    Overflow,
    #[error("linear program: {0}")]
    Lp(#[from] LpError),
    #[error("the program's answer failed exact re-verification")]
    Unverified,
}

/// A total operation `C^arity → C`, tabulated in lexicographic order of arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperationTable {
    arity: usize,
    domain_size: usize,
    table: Vec<usize>,
}

impl OperationTable {
    pub fn new(arity: usize, domain_size: usize, table: Vec<usize>) -> Result<OperationTable, FractionalError> {
        let expected = tuple_count(arity, domain_size);
        if table.len() != expected {
            return Err(FractionalError::TableSize {
                expected,
                found: table.len(),
            });
        }
        if let Some(&v) = table.iter().find(|&&v| v >= domain_size) {
            return Err(FractionalError::ValueOutOfRange(v));
        }
        Ok(OperationTable {
            arity,
            domain_size,
            table,
        })
    }

    pub fn from_fn(arity: usize, domain_size: usize, mut f: impl FnMut(&[usize]) -> usize) -> OperationTable {
        let mut args = alloc::vec![0; arity];
        let table = (0..tuple_count(arity, domain_size))
            .map(|i| {
                decode_into(i, domain_size, &mut args);
                f(&args)
            })
            .collect();
        OperationTable {
            arity,
            domain_size,
            table,
        }
    }

    /// The `i`-th projection of arity `ell`.
    pub fn projection(ell: usize, i: usize, domain_size: usize) -> OperationTable {
        OperationTable::from_fn(ell, domain_size, |a| a[i])
    }

    pub fn min(ell: usize, domain_size: usize) -> OperationTable {
        OperationTable::from_fn(ell, domain_size, |a| a.iter().copied().min().unwrap_or(0))
    }

    pub fn max(ell: usize, domain_size: usize) -> OperationTable {
        OperationTable::from_fn(ell, domain_size, |a| a.iter().copied().max().unwrap_or(0))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, args: &[usize]) -> usize {
        self.table[encode(args, self.domain_size)]
    }

    /// Invariant under rotating the arguments.
    pub fn is_cyclic(&self) -> bool {
        let mut args = alloc::vec![0; self.arity];
        (0..self.table.len()).all(|i| {
            decode_into(i, self.domain_size, &mut args);
            args.rotate_left(1);
            self.table[encode(&args, self.domain_size)] == self.table[i]
        })
    }

    /// `s(a,r,e,a) = s(r,a,r,e)` for all `a, r, e`.
    pub fn is_siggers(&self) -> bool {
        self.arity == 4 && is_siggers_table(self.domain_size, |p| self.table[p])
    }

    /// Unary and injective.
    pub fn is_injective(&self) -> bool {
        let mut seen = alloc::vec![false; self.domain_size];
        self.table.iter().all(|&v| !core::mem::replace(&mut seen[v], true))
    }

    /// Sorted set of values taken.
    pub fn image(&self) -> Vec<usize> {
        let mut img = self.table.clone();
        img.sort_unstable();
        img.dedup();
        img
    }

    /// Coordinatewise application to `arity` tuples of equal length.
    pub fn apply_rows(&self, rows: &[&[usize]], out: &mut Vec<usize>) {
        let k = rows.first().map_or(0, |r| r.len());
        let mut args = alloc::vec![0; self.arity];
        out.clear();
        for i in 0..k {
            for (j, r) in rows.iter().enumerate() {
                args[j] = r[i];
            }
            out.push(self.apply(&args));
        }
    }
}

pub(crate) fn is_siggers_table(n: usize, f: impl Fn(usize) -> usize) -> bool {
    for a in 0..n {
        for r in 0..n {
            for e in 0..n {
                if f(encode(&[a, r, e, a], n)) != f(encode(&[r, a, r, e], n)) {
                    return false;
                }
            }
        }
    }
    true
}

/// A probability distribution with finite support on operations of one arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalOperation {
    arity: usize,
    domain_size: usize,
    support: Vec<(OperationTable, Rational)>,
}

impl FractionalOperation {
    /// Merges repeated tables; weights must be positive and sum to exactly 1.
    pub fn new(mut support: Vec<(OperationTable, Rational)>) -> Result<FractionalOperation, FractionalError> {
        let (arity, domain_size) = match support.first() {
            Some((f, _)) => (f.arity, f.domain_size),
            None => return Err(FractionalError::InvalidWeights),
        };
        if support.iter().any(|(f, _)| f.arity != arity || f.domain_size != domain_size) {
            return Err(FractionalError::Mixed);
        }
        if support.iter().any(|(_, w)| !w.is_positive()) {
            return Err(FractionalError::InvalidWeights);
        }
        support.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(OperationTable, Rational)> = Vec::with_capacity(support.len());
        for (f, w) in support {
            match merged.last_mut() {
                Some((g, v)) if *g == f => *v += w,
                _ => merged.push((f, w)),
            }
        }
        let total: Rational = merged.iter().map(|(_, w)| w.clone()).sum();
        if !total.is_one() {
            return Err(FractionalError::InvalidWeights);
        }
        Ok(FractionalOperation {
            arity,
            domain_size,
            support: merged,
        })
    }

    /// Weight 1 on a single operation.
    pub fn single(f: OperationTable) -> FractionalOperation {
        FractionalOperation {
            arity: f.arity,
            domain_size: f.domain_size,
            support: alloc::vec![(f, Rational::one())],
        }
    }

    /// Uniform over the `ell` projections.
    pub fn identity(ell: usize, domain_size: usize) -> FractionalOperation {
        let w = Rational::new(1.into(), (ell as i64).into());
        FractionalOperation::new(
            (0..ell)
                .map(|i| (OperationTable::projection(ell, i, domain_size), w.clone()))
                .collect(),
        )
        .expect("projections form a distribution")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn support(&self) -> &[(OperationTable, Rational)] {
        &self.support
    }

    pub fn weight(&self, f: &OperationTable) -> Rational {
        self.support
            .iter()
            .find(|(g, _)| g == f)
            .map_or_else(Rational::zero, |(_, w)| w.clone())
    }
}

/// The improvement inequality for one family `a¹..aˡ` given as tuple indices.
pub fn improves_on(omega: &FractionalOperation, r: &ValuedRelation, family: &[usize]) -> bool {
    let rhs: Cost = family.iter().map(|&t| r.at(t).clone()).sum();
    let Cost::Finite(rhs) = rhs else { return true };
    let rhs = rhs / Rational::from_integer((omega.arity as i64).into());
    let decoded: Vec<Vec<usize>> = family.iter().map(|&t| r.tuple(t)).collect();
    let rows: Vec<&[usize]> = decoded.iter().map(|t| t.as_slice()).collect();
    let mut image = Vec::new();
    let mut lhs = Rational::zero();
    for (f, w) in &omega.support {
        f.apply_rows(&rows, &mut image);
        match r.get(&image) {
            Cost::Finite(c) => lhs += c * w,
            Cost::Infinite => return false,
        }
    }
    lhs <= rhs
}

/// First family (as tuple indices, lexicographically) on which `omega` fails
/// to improve `r`.
pub fn improvement_violation(omega: &FractionalOperation, r: &ValuedRelation) -> Option<Vec<usize>> {
    let mut family = alloc::vec![0; omega.arity];
    (0..tuple_count(omega.arity, r.len())).find_map(|idx| {
        decode_into(idx, r.len(), &mut family);
        (!improves_on(omega, r, &family)).then(|| family.clone())
    })
}

/// `Σ_f ω(f)·R(f(a¹..aˡ)) ≤ (1/ℓ) Σ_j R(aʲ)` for every family; families with
/// an infinite right-hand side impose nothing.
pub fn improves(omega: &FractionalOperation, r: &ValuedRelation) -> bool {
    omega.domain_size == r.domain_size() && improvement_violation(omega, r).is_none()
}

/// Improves every relation of `gamma`.
pub fn is_fractional_polymorphism(omega: &FractionalOperation, gamma: &ValuedStructure) -> bool {
    gamma.relations().iter().all(|r| improves(omega, r))
}

/// Permutations of the domain that preserve every table.
pub fn automorphisms(gamma: &ValuedStructure) -> Vec<Vec<usize>> {
    let n = gamma.domain_size();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    let mut buf = Vec::new();
    loop {
        let ok = gamma.relations().iter().all(|r| {
            (0..r.len()).all(|i| {
                let t = r.tuple(i);
                buf.clear();
                buf.extend(t.iter().map(|&e| perm[e]));
                r.get(&buf) == r.at(i)
            })
        });
        if ok {
            out.push(perm.clone());
        }
        if !next_permutation(&mut perm) {
            return out;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests;
