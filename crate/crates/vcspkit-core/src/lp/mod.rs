//! Linear programming: an exact rational simplex for small programs and a
//! floating-point revised simplex whose answers are re-verified exactly.

mod columns;
mod exact;
mod float;
mod verify;

use alloc::vec::Vec;

use crate::cost::Rational;

pub use columns::{solve_columns, ColumnOutcome, ColumnSolution, IntegerColumns};
pub use exact::solve_exact;
pub use float::{solve_float, ColumnOracle, FloatOutcome, FloatSolution};
pub use verify::{rationalize, verify_basis};

/// Programs with at most this many variables go to the exact simplex.
pub const EXACT_VARIABLE_LIMIT: usize = 2000;

/// Primal feasibility tolerance of the floating-point simplex.
pub const FLOAT_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub kind: RowKind,
    pub rhs: Rational,
}

/// Minimize `objective · x` subject to the constraints and `x ≥ 0`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> LinearProgram {
        LinearProgram {
            num_vars,
            objective: alloc::vec![Rational::from_integer(0.into()); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, Rational)>, kind: RowKind, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, kind, rhs });
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: Rational,
    pub primal: Vec<Rational>,
    /// One multiplier per constraint: `c_B · B⁻¹` in the original row signs.
    pub duals: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("floating-point simplex did not converge within {0} iterations")]
    IterationLimit(usize),
    #[error("floating-point answer could not be verified exactly: {0}")]
    Unverified(&'static str),
}

/// Solves exactly when small; otherwise solves in floating point and certifies
/// the final basis in exact arithmetic.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    if lp.num_vars <= EXACT_VARIABLE_LIMIT {
        return Ok(solve_exact(lp));
    }
    let oracle = DenseOracle::new(lp);
    let kinds: Vec<RowKind> = lp.constraints.iter().map(|c| c.kind).collect();
    let rhs: Vec<f64> = lp.constraints.iter().map(|c| to_f64(&c.rhs)).collect();
    match solve_float(&oracle, &kinds, &rhs)? {
        FloatOutcome::Optimal(sol) => verify_basis(lp, &sol.basis)
            .map(LpOutcome::Optimal)
            .ok_or(LpError::Unverified("basis is not optimal in exact arithmetic")),
        FloatOutcome::Infeasible(_) => Err(LpError::Unverified("infeasibility of a large program")),
        FloatOutcome::Unbounded => Err(LpError::Unverified("unboundedness of a large program")),
    }
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub(crate) struct DenseOracle {
    columns: Vec<Vec<(usize, f64)>>,
    costs: Vec<f64>,
    rows: usize,
}

impl DenseOracle {
    pub(crate) fn new(lp: &LinearProgram) -> DenseOracle {
        let mut columns = alloc::vec![Vec::new(); lp.num_vars];
        for (i, c) in lp.constraints.iter().enumerate() {
            for (j, a) in &c.coeffs {
                columns[*j].push((i, to_f64(a)));
            }
        }
        DenseOracle {
            columns,
            costs: lp.objective.iter().map(to_f64).collect(),
            rows: lp.constraints.len(),
        }
    }
}

impl ColumnOracle for DenseOracle {
    fn rows(&self) -> usize {
        self.rows
    }
    fn columns(&self) -> usize {
        self.columns.len()
    }
    fn column(&self, j: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        out.extend_from_slice(&self.columns[j]);
    }
    fn cost(&self, j: usize) -> f64 {
        self.costs[j]
    }
}
