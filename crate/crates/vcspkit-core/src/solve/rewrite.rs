use alloc::string::String;
use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::cost::{Cost, Rational};
use crate::query::UnionFind;
use crate::vcsp::{
    apply_clone_operator, express, CloneOp, ExprAtom, Instance, RelRef, TauExpression, ValuedStructure,
    VcspError,
};

/// How the rewritten symbol is obtained from the others; every case removes
/// all atoms over `symbol` from an instance.
#[derive(Clone, Debug)]
pub enum Rewrite<'a> {
    /// `symbol` is equality: its arguments are identified.
    Equality { symbol: RelRef },
    /// `symbol` is ∞ everywhere.
    Empty { symbol: RelRef },
    /// `symbol` is defined by minimizing `expr` over its variables outside `free`.
    Substitute {
        symbol: usize,
        expr: &'a TauExpression,
        free: &'a [usize],
    },
    /// `symbol = scale · source + shift` with `scale ≥ 0`.
    ScaleShift {
        symbol: usize,
        source: usize,
        scale: Rational,
        shift: Rational,
    },
    /// `symbol = Feas(source)`.
    Feas { symbol: usize, source: usize },
    /// `symbol = Opt(source)`.
    Opt { symbol: usize, source: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("the table of `{0}` does not match the claimed definition")]
    Mismatch(String),
    #[error("the source relation must differ from the rewritten one")]
    SelfSource,
    #[error(transparent)]
    Vcsp(#[from] VcspError),
}

/// Rewrites an instance into one without `symbol` that has a solution exactly
/// when the input does.
pub fn rewrite_instance(inst: &Instance, rule: &Rewrite<'_>, gamma: &ValuedStructure) -> Result<Instance, RewriteError> {
    inst.expr.validate(gamma)?;
    check(rule, gamma)?;
    Ok(match rule {
        Rewrite::Equality { symbol } => identify(inst, *symbol),
        Rewrite::Empty { symbol } => drop_empty(inst, *symbol, gamma),
        Rewrite::Substitute { symbol, expr, free } => {
            let mut out = TauExpression::new(inst.expr.variables().to_vec());
            for atom in inst.expr.atoms() {
                if atom.rel == RelRef::Symbol(*symbol) {
                    splice(&mut out, expr, free, &atom.args);
                } else {
                    out.push(atom.rel, atom.args.clone());
                }
            }
            Instance::new(out, inst.threshold.clone())
        }
        Rewrite::ScaleShift {
            symbol,
            source,
            scale,
            shift,
        } => {
            let (p, q) = (scale.numer().clone(), scale.denom().clone());
            let (rest, hits) = split(inst, *symbol);
            let mut out = TauExpression::new(inst.expr.variables().to_vec());
            repeat(&mut out, &rest, &q);
            let redirected: Vec<ExprAtom> = hits
                .iter()
                .map(|a| ExprAtom {
                    rel: RelRef::Symbol(*source),
                    args: a.args.clone(),
                })
                .collect();
            repeat(&mut out, &redirected, &p);
            let k = Rational::from_integer((hits.len() as i64).into());
            let threshold = Rational::from_integer(q) * (&inst.threshold - k * shift);
            Instance::new(out, threshold)
        }
        Rewrite::Feas { symbol, source } => {
            let table = gamma.relation(*source);
            let Some(w) = table.max_finite().and_then(|c| c.finite().cloned()) else {
                return Ok(drop_empty(inst, RelRef::Symbol(*symbol), gamma));
            };
            let low = table.min_value().finite().cloned().expect("has a finite entry");
            let (rest, hits) = split(inst, *symbol);
            let k = Rational::from_integer((hits.len() as i64).into());
            let d = feas_gap(&rest, gamma, &inst.threshold);
            let spread = &w - low.min(Rational::zero());
            let t = (&k * spread / d).ceil() + Rational::one();
            let mut out = TauExpression::new(inst.expr.variables().to_vec());
            repeat(&mut out, &rest, t.numer());
            for a in &hits {
                out.push(RelRef::Symbol(*source), a.args.clone());
            }
            Instance::new(out, &t * &inst.threshold + k * w)
        }
        Rewrite::Opt { symbol, source } => {
            let table = gamma.relation(*source);
            let base = match table.min_value() {
                Cost::Finite(m) => m,
                Cost::Infinite => return Ok(drop_empty(inst, RelRef::Symbol(*symbol), gamma)),
            };
            let step = (0..table.len())
                .filter_map(|i| table.at(i).finite())
                .map(|c| c - &base)
                .filter(|c| c.is_positive())
                .min();
            let (rest, hits) = split(inst, *symbol);
            let mut out = TauExpression::new(inst.expr.variables().to_vec());
            for a in &rest {
                out.push(a.rel, a.args.clone());
            }
            let Some(m) = step else {
                // The source is 0/∞ up to a constant: one copy suffices.
                for a in &hits {
                    out.push(RelRef::Symbol(*source), a.args.clone());
                }
                let k = Rational::from_integer((hits.len() as i64).into());
                return Ok(Instance::new(out, &inst.threshold + k * base));
            };
            let (low, high) = weight_range(gamma);
            let k = Rational::from_integer((inst.expr.atoms().len() as i64).into());
            let top = high.max(Rational::zero());
            let copies = &k * ((&top - low.min(Rational::zero())) / &m).ceil() + Rational::one();
            let redirected: Vec<ExprAtom> = hits
                .iter()
                .map(|a| ExprAtom {
                    rel: RelRef::Symbol(*source),
                    args: a.args.clone(),
                })
                .collect();
            repeat(&mut out, &redirected, copies.numer());
            let offset = copies * Rational::from_integer((hits.len() as i64).into()) * base;
            Instance::new(out, (k * top).min(inst.threshold.clone()) + offset)
        }
    })
}

fn check(rule: &Rewrite<'_>, gamma: &ValuedStructure) -> Result<(), RewriteError> {
    let mismatch = |r: RelRef| Err(RewriteError::Mismatch(String::from(gamma.name_of(r))));
    let expect = |symbol: usize, source: usize, op: CloneOp| -> Result<(), RewriteError> {
        if symbol == source {
            return Err(RewriteError::SelfSource);
        }
        if apply_clone_operator(&op, gamma.relation(source))? != *gamma.relation(symbol) {
            return mismatch(RelRef::Symbol(symbol));
        }
        Ok(())
    };
    match rule {
        Rewrite::Equality { symbol } => {
            let t = gamma.table_of(*symbol);
            if t != gamma.table_of(RelRef::Equality) || t.arity() != 2 {
                return mismatch(*symbol);
            }
        }
        Rewrite::Empty { symbol } => {
            if gamma.table_of(*symbol).max_finite().is_some() {
                return mismatch(*symbol);
            }
        }
        Rewrite::Substitute { symbol, expr, free } => {
            if expr.atoms().iter().any(|a| a.rel == RelRef::Symbol(*symbol)) {
                return Err(RewriteError::SelfSource);
            }
            if express(gamma, expr, free)? != *gamma.relation(*symbol) {
                return mismatch(RelRef::Symbol(*symbol));
            }
        }
        Rewrite::ScaleShift {
            symbol,
            source,
            scale,
            shift,
        } => {
            let scaled = apply_clone_operator(&CloneOp::Scale(scale.clone()), gamma.relation(*source))?;
            let shifted = apply_clone_operator(&CloneOp::Shift(shift.clone()), &scaled)?;
            if *symbol == *source {
                return Err(RewriteError::SelfSource);
            }
            if shifted != *gamma.relation(*symbol) {
                return mismatch(RelRef::Symbol(*symbol));
            }
        }
        Rewrite::Feas { symbol, source } => expect(*symbol, *source, CloneOp::Feas)?,
        Rewrite::Opt { symbol, source } => expect(*symbol, *source, CloneOp::Opt)?,
    }
    Ok(())
}

fn split(inst: &Instance, symbol: usize) -> (Vec<ExprAtom>, Vec<ExprAtom>) {
    inst.expr
        .atoms()
        .iter()
        .cloned()
        .partition(|a| a.rel != RelRef::Symbol(symbol))
}

fn repeat(out: &mut TauExpression, atoms: &[ExprAtom], times: &num_bigint::BigInt) {
    let mut i = num_bigint::BigInt::zero();
    while &i < times {
        for a in atoms {
            out.push(a.rel, a.args.clone());
        }
        i += 1;
    }
}

/// Merges the arguments of every atom over `symbol` and drops those atoms.
fn identify(inst: &Instance, symbol: RelRef) -> Instance {
    let n = inst.expr.num_vars();
    let mut uf = UnionFind::new(n);
    for a in inst.expr.atoms().iter().filter(|a| a.rel == symbol) {
        uf.union(a.args[0], a.args[1]);
    }
    let mut index = alloc::vec![usize::MAX; n];
    let mut names = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        if index[r] == usize::MAX {
            index[r] = names.len();
            names.push(inst.expr.variables()[v].clone());
        }
        index[v] = index[r];
    }
    let mut out = TauExpression::new(names);
    for a in inst.expr.atoms().iter().filter(|a| a.rel != symbol) {
        out.push(a.rel, a.args.iter().map(|&v| index[v]).collect());
    }
    Instance::new(out, inst.threshold.clone())
}

/// Without atoms over `symbol` the instance is unchanged; otherwise it is
/// replaced by one that can never meet its threshold.
fn drop_empty(inst: &Instance, symbol: RelRef, gamma: &ValuedStructure) -> Instance {
    if inst.expr.atoms().iter().all(|a| a.rel != symbol) {
        return inst.clone();
    }
    let other = (0..gamma.signature().len()).find(|&i| RelRef::Symbol(i) != symbol);
    match other {
        Some(s) => {
            let k = gamma.signature().arity(s);
            let floor = match gamma.relation(s).min_value() {
                Cost::Finite(m) => m - Rational::one(),
                Cost::Infinite => Rational::zero(),
            };
            let expr = TauExpression::with_vars(1).with(RelRef::Symbol(s), &alloc::vec![0; k]);
            Instance::new(expr, floor)
        }
        None => Instance::new(TauExpression::default(), -Rational::one()),
    }
}

/// Distance from the threshold to the next value above it on the grid that
/// contains every sum of the given atoms.
fn feas_gap(atoms: &[ExprAtom], gamma: &ValuedStructure, u: &Rational) -> Rational {
    let mut den = num_bigint::BigInt::one();
    for a in atoms {
        let t = gamma.table_of(a.rel);
        for i in 0..t.len() {
            if let Some(c) = t.at(i).finite() {
                den = den.lcm(c.denom());
            }
        }
    }
    let scaled = (u * Rational::from_integer(den.clone())).floor() + Rational::one();
    scaled / Rational::from_integer(den) - u
}

/// Lowest and highest finite weights over all relations (0 if there are none).
fn weight_range(gamma: &ValuedStructure) -> (Rational, Rational) {
    let mut low = Rational::zero();
    let mut high = Rational::zero();
    for r in gamma.relations() {
        for i in 0..r.len() {
            if let Some(c) = r.at(i).finite() {
                if c < &low {
                    low = c.clone();
                }
                if c > &high {
                    high = c.clone();
                }
            }
        }
    }
    (low, high)
}

/// Appends a copy of `def` with `free[i]` bound to `args[i]` and fresh
/// variables elsewhere; a repeated free variable adds equality atoms.
pub(crate) fn splice(out: &mut TauExpression, def: &TauExpression, free: &[usize], args: &[usize]) {
    let mut map = alloc::vec![usize::MAX; def.num_vars()];
    for (&f, &a) in free.iter().zip(args) {
        if map[f] == usize::MAX {
            map[f] = a;
        } else if map[f] != a {
            out.push(RelRef::Equality, alloc::vec![map[f], a]);
        }
    }
    for slot in map.iter_mut() {
        if *slot == usize::MAX {
            let name = alloc::format!("_{}", out.num_vars());
            *slot = out.add_variable(name);
        }
    }
    for a in def.atoms() {
        out.push(a.rel, a.args.iter().map(|&v| map[v]).collect());
    }
}
