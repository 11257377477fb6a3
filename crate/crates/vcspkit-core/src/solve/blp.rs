use alloc::vec::Vec;

use crate::cost::{Cost, Rational};
use crate::lp::{self, LinearProgram, LpError, LpOutcome, RowKind};
use crate::vcsp::{decode_into, TauExpression, ValuedStructure};

/// Optimum of the basic LP relaxation.
#[derive(Clone, Debug, PartialEq)]
pub struct BlpResult {
    pub bound: Cost,
    /// One distribution over the domain per variable; empty when the bound is ∞.
    pub marginals: Vec<Vec<Rational>>,
}

/// Solves the basic LP relaxation: a distribution per variable and one per
/// summand over its finite tuples, linked by one-variable marginals.
pub fn solve_blp(expr: &TauExpression, gamma: &ValuedStructure) -> Result<BlpResult, LpError> {
    let n = gamma.domain_size();
    let vars = expr.num_vars();
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    let mut blocks = Vec::new();
    let mut next = vars * n;
    for atom in expr.atoms() {
        let table = gamma.table_of(atom.rel);
        let finite: Vec<(usize, Rational)> = (0..table.len())
            .filter_map(|i| table.at(i).finite().map(|c| (i, c.clone())))
            .collect();
        if finite.is_empty() {
            return Ok(BlpResult {
                bound: Cost::Infinite,
                marginals: Vec::new(),
            });
        }
        blocks.push((next, finite));
        next += blocks.last().map_or(0, |b| b.1.len());
    }
    let mut prog = LinearProgram::new(next);
    for v in 0..vars {
        prog.add((0..n).map(|a| (v * n + a, one.clone())).collect(), RowKind::Eq, one.clone());
    }
    let mut t = Vec::new();
    for (atom, (start, finite)) in expr.atoms().iter().zip(&blocks) {
        let k = atom.args.len();
        t.resize(k, 0);
        for (j, (_, c)) in finite.iter().enumerate() {
            prog.objective[start + j] = c.clone();
        }
        if k == 0 {
            prog.add((0..finite.len()).map(|j| (start + j, one.clone())).collect(), RowKind::Eq, one.clone());
            continue;
        }
        // Each position's marginal must match the variable's distribution.
        for (p, &v) in atom.args.iter().enumerate() {
            let mut rows: Vec<Vec<(usize, Rational)>> =
                (0..n).map(|a| alloc::vec![(v * n + a, -one.clone())]).collect();
            for (j, (idx, _)) in finite.iter().enumerate() {
                decode_into(*idx, n, &mut t);
                rows[t[p]].push((start + j, one.clone()));
            }
            for row in rows {
                prog.add(row, RowKind::Eq, zero.clone());
            }
        }
    }
    match lp::solve(&prog)? {
        LpOutcome::Optimal(sol) => Ok(BlpResult {
            bound: Cost::Finite(sol.value),
            marginals: (0..vars).map(|v| sol.primal[v * n..(v + 1) * n].to_vec()).collect(),
        }),
        LpOutcome::Infeasible => Ok(BlpResult {
            bound: Cost::Infinite,
            marginals: Vec::new(),
        }),
        LpOutcome::Unbounded => Err(LpError::Unverified("relaxation reported unbounded")),
    }
}
