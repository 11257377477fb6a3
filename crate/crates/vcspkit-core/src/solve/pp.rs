use alloc::vec::Vec;

use super::rewrite::splice;
use crate::vcsp::{Instance, PpDefinition, RelRef, TauExpression, VcspError};

/// Turns an instance over the d-th pp-power defined by `defs` into an
/// instance over the base structure with the same threshold: each variable
/// becomes `d` coordinates and each atom its defining expression.
pub fn reduce_pp_instance(inst: &Instance, d: usize, defs: &[PpDefinition]) -> Result<Instance, VcspError> {
    if d == 0 {
        return Err(VcspError::ZeroDimension);
    }
    let mut names = Vec::with_capacity(inst.expr.num_vars() * d);
    for v in inst.expr.variables() {
        if d == 1 {
            names.push(v.clone());
        } else {
            names.extend((0..d).map(|c| alloc::format!("{v}.{c}")));
        }
    }
    let mut out = TauExpression::new(names);
    let mut flat = Vec::new();
    for atom in inst.expr.atoms() {
        if let Some(&v) = atom.args.iter().find(|&&v| v >= inst.expr.num_vars()) {
            return Err(VcspError::VariableOutOfRange(v));
        }
        flat.clear();
        flat.extend(atom.args.iter().flat_map(|&v| (0..d).map(move |c| v * d + c)));
        match atom.rel {
            RelRef::Symbol(i) => {
                let def = defs.get(i).ok_or_else(|| VcspError::UnknownSymbol(alloc::format!("#{i}")))?;
                if def.arity != atom.args.len() || def.free.len() != def.arity * d {
                    return Err(VcspError::ArityMismatch {
                        symbol: def.name.clone(),
                        expected: def.arity,
                        found: atom.args.len(),
                    });
                }
                splice(&mut out, &def.expr, &def.free, &flat);
            }
            // Equal power elements agree on every coordinate.
            RelRef::Equality => {
                for c in 0..d {
                    out.push(RelRef::Equality, alloc::vec![flat[c], flat[d + c]]);
                }
            }
            RelRef::Empty => out.push(RelRef::Empty, alloc::vec![flat[0]]),
        }
    }
    Ok(Instance::new(out, inst.threshold.clone()))
}
