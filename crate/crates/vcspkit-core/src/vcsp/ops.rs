use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Signed;

use super::{decode_into, tuple_count, TauExpression, ValuedRelation, ValuedStructure, VcspError};
use crate::cost::{Cost, Rational};
use crate::query::{RelationalStructure, Signature};
use crate::solve::Minimizer;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CloneOp {
    Feas,
    Opt,
    Shift(Rational),
    Scale(Rational),
}

pub fn apply_clone_operator(op: &CloneOp, r: &ValuedRelation) -> Result<ValuedRelation, VcspError> {
    Ok(match op {
        CloneOp::Feas => r.map_values(|c| if c.is_finite() { Cost::zero() } else { Cost::Infinite }),
        CloneOp::Opt => {
            let min = r.min_value();
            r.map_values(|c| {
                if c.is_finite() && *c == min {
                    Cost::zero()
                } else {
                    Cost::Infinite
                }
            })
        }
        CloneOp::Shift(s) => r.map_values(|c| c.add_rational(s)),
        CloneOp::Scale(f) => {
            if f.is_negative() {
                return Err(VcspError::NegativeScale(f.clone()));
            }
            r.map_values(|c| c.scale(f))
        }
    })
}

/// The relation defined by minimizing `expr` over its variables outside `free`;
/// coordinates follow the order of `free`.
pub fn express(gamma: &ValuedStructure, expr: &TauExpression, free: &[usize]) -> Result<ValuedRelation, VcspError> {
    expr.validate(gamma)?;
    if let Some(&v) = free.iter().find(|&&v| v >= expr.num_vars()) {
        return Err(VcspError::VariableOutOfRange(v));
    }
    let n = gamma.domain_size();
    let k = free.len();
    let solver = Minimizer::new(expr, gamma);
    let mut pins = alloc::vec![None; expr.num_vars()];
    let mut t = alloc::vec![0; k];
    let mut table = Vec::with_capacity(tuple_count(k, n));
    for idx in 0..tuple_count(k, n) {
        decode_into(idx, n, &mut t);
        let mut clash = false;
        for p in pins.iter_mut() {
            *p = None;
        }
        for (i, &v) in free.iter().enumerate() {
            match pins[v] {
                Some(w) if w != t[i] => clash = true,
                _ => pins[v] = Some(t[i]),
            }
        }
        // A variable listed twice forces equal coordinates.
        table.push(if clash { Cost::Infinite } else { solver.minimum(&pins) });
    }
    Ok(ValuedRelation::from_table(k, n, table).expect("table has the right size"))
}

/// A symbol of a pp-power: `arity` coordinates of the power, defined by `expr`
/// over `arity * d` free variables listed in `free`.
#[derive(Clone, Debug)]
pub struct PpDefinition {
    pub name: String,
    pub arity: usize,
    pub expr: TauExpression,
    pub free: Vec<usize>,
}

/// Element name for a tuple of the power domain: `(a,b,...)`.
pub fn power_element_name(gamma: &ValuedStructure, coords: &[usize]) -> String {
    let parts: Vec<&str> = coords.iter().map(|&c| gamma.elements()[c].as_str()).collect();
    alloc::format!("({})", parts.join(","))
}

fn power_elements(gamma: &ValuedStructure, d: usize) -> Vec<String> {
    let n = gamma.domain_size();
    let mut t = alloc::vec![0; d];
    (0..tuple_count(d, n))
        .map(|i| {
            decode_into(i, n, &mut t);
            power_element_name(gamma, &t)
        })
        .collect()
}

/// The d-th pp-power: domain `C^d` in lexicographic order.
pub fn pp_power(gamma: &ValuedStructure, d: usize, defs: &[PpDefinition]) -> Result<ValuedStructure, VcspError> {
    if d == 0 {
        return Err(VcspError::ZeroDimension);
    }
    let mut sig = Signature::new();
    let mut rels = Vec::new();
    for def in defs {
        if def.free.len() != def.arity * d {
            return Err(VcspError::ArityMismatch {
                symbol: def.name.clone(),
                expected: def.arity * d,
                found: def.free.len(),
            });
        }
        // Tuples of C^{kd} in lexicographic order coincide with k-tuples over C^d.
        let flat = express(gamma, &def.expr, &def.free)?;
        let n = tuple_count(d, gamma.domain_size());
        let rel = ValuedRelation::from_table(def.arity, n, flat.table().to_vec()).expect("sizes agree");
        sig.add(&def.name, def.arity)
            .map_err(|_| VcspError::DuplicateSymbol(def.name.clone()))?;
        rels.push(rel);
    }
    ValuedStructure::new(power_elements(gamma, d), sig, rels)
}

/// The ℓ-th power with averaged tables:
/// `R((a¹₁..a¹_ℓ), …, (aᵏ₁..aᵏ_ℓ)) = (1/ℓ) Σᵢ R(a¹ᵢ, …, aᵏᵢ)`.
pub fn averaged_power(gamma: &ValuedStructure, ell: usize) -> Result<ValuedStructure, VcspError> {
    if ell == 0 {
        return Err(VcspError::ZeroDimension);
    }
    let n = gamma.domain_size();
    let big = tuple_count(ell, n);
    let weight = Rational::new(1.into(), (ell as i64).into());
    let mut coords = alloc::vec![0; ell];
    let mut rels = Vec::new();
    for r in gamma.relations() {
        let k = r.arity();
        let mut slice = alloc::vec![0; k];
        rels.push(ValuedRelation::from_fn(k, big, |t| {
            let mut total = Cost::zero();
            let mut cells: Vec<Vec<usize>> = Vec::with_capacity(k);
            for &e in t {
                decode_into(e, n, &mut coords);
                cells.push(coords.clone());
            }
            for i in 0..ell {
                for (p, c) in cells.iter().enumerate() {
                    slice[p] = c[i];
                }
                total = &total + r.get(&slice);
            }
            total.scale(&weight)
        }));
    }
    ValuedStructure::new(power_elements(gamma, ell), gamma.signature().clone(), rels)
}

/// The valued structure of a dual: endogenous relations cost 0 on the dual's
/// tuples and 1 elsewhere; exogenous ones cost 0 or ∞.
pub fn dual_to_valued(b: &RelationalStructure, sigma: &[usize]) -> ValuedStructure {
    let n = b.size();
    let rels = (0..b.signature().len())
        .map(|r| {
            let miss = if sigma.contains(&r) { Cost::Infinite } else { Cost::one() };
            ValuedRelation::from_fn(b.signature().arity(r), n, |t| {
                if b.contains(r, t) {
                    Cost::zero()
                } else {
                    miss.clone()
                }
            })
        })
        .collect();
    ValuedStructure::new(b.elements().to_vec(), b.signature().clone(), rels)
        .expect("dual relations match the signature")
}

/// Crisp relation as a tuple set (the tuples of cost 0).
pub fn zero_tuples(r: &ValuedRelation) -> Vec<Vec<usize>> {
    (0..r.len()).filter(|&i| r.at(i).is_zero()).map(|i| r.tuple(i)).collect()
}
