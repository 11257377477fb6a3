use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use super::{is_fractional_polymorphism, is_siggers_table, FractionalError, FractionalOperation, OperationTable};
use crate::cost::{Cost, Rational};
use crate::lp::{solve_columns, ColumnOutcome, ColumnSolution, IntegerColumns, RowKind};
use crate::vcsp::{decode_into, encode, tuple_count, ValuedStructure};

/// Default bound on the number of candidate operation tables.
pub const DEFAULT_OPERATION_CAP: usize = 70_000;

/// How a column code determines a table: the value at a point of `C^ell` is
/// the digit of its slot. Cyclic tables use one slot per rotation orbit.
struct Geometry {
    n: usize,
    ell: usize,
    slots: usize,
    slot_of: Vec<usize>,
}

impl Geometry {
    fn full(n: usize, ell: usize) -> Geometry {
        let points = tuple_count(ell, n);
        Geometry {
            n,
            ell,
            slots: points,
            slot_of: (0..points).collect(),
        }
    }

    fn cyclic(n: usize, ell: usize) -> Geometry {
        let points = tuple_count(ell, n);
        let mut slot_of = alloc::vec![usize::MAX; points];
        let mut slots = 0;
        let mut t = alloc::vec![0; ell];
        for p in 0..points {
            if slot_of[p] != usize::MAX {
                continue;
            }
            decode_into(p, n, &mut t);
            for _ in 0..ell {
                slot_of[encode(&t, n)] = slots;
                t.rotate_left(1);
            }
            slots += 1;
        }
        Geometry { n, ell, slots, slot_of }
    }

    fn count(&self) -> u128 {
        let mut c: u128 = 1;
        for _ in 0..self.slots {
            c = c.saturating_mul(self.n as u128);
        }
        c
    }

    fn digits(&self, mut code: usize, out: &mut [usize]) {
        for d in out.iter_mut().rev() {
            *d = code % self.n;
            code /= self.n;
        }
    }

    fn table(&self, code: usize) -> OperationTable {
        let mut d = alloc::vec![0; self.slots];
        self.digits(code, &mut d);
        OperationTable::new(self.ell, self.n, self.slot_of.iter().map(|&s| d[s]).collect()).expect("valid table")
    }
}

/// One improvement inequality: the relation and, per coordinate, the point of
/// `C^ell` formed by the family's entries there.
struct Row {
    rel: usize,
    points: Vec<usize>,
    rhs: i64,
}

struct Program {
    geo: Geometry,
    /// Scaled finite costs per relation and tuple.
    scaled: Vec<Vec<Option<i64>>>,
    rows: Vec<Row>,
    codes: Vec<usize>,
    costs: Vec<i64>,
}

impl Program {
    fn entry(&self, row: &Row, digits: &[usize]) -> Option<i64> {
        let mut idx = 0;
        for &p in &row.points {
            idx = idx * self.geo.n + digits[self.geo.slot_of[p]];
        }
        self.scaled[row.rel][idx]
    }

    fn solve(&self) -> Result<ColumnOutcome, FractionalError> {
        let mut kinds = alloc::vec![RowKind::Le; self.rows.len()];
        kinds.push(RowKind::Eq);
        let mut rhs: Vec<i64> = self.rows.iter().map(|r| r.rhs).collect();
        rhs.push(1);
        Ok(solve_columns(self, &kinds, &rhs)?)
    }

    fn operation(&self, sol: &ColumnSolution) -> Result<FractionalOperation, FractionalError> {
        let support = sol
            .weights
            .iter()
            .map(|(j, w)| (self.geo.table(self.codes[*j]), w.clone()))
            .collect();
        FractionalOperation::new(support).map_err(|_| FractionalError::Unverified)
    }
}

impl IntegerColumns for Program {
    fn rows(&self) -> usize {
        self.rows.len() + 1
    }
    fn columns(&self) -> usize {
        self.codes.len()
    }
    fn column(&self, j: usize, out: &mut Vec<(usize, i64)>) {
        let mut digits = alloc::vec![0; self.geo.slots];
        self.geo.digits(self.codes[j], &mut digits);
        out.clear();
        for (i, row) in self.rows.iter().enumerate() {
            let v = self.entry(row, &digits).expect("infinite columns are excluded");
            if v != 0 {
                out.push((i, v));
            }
        }
        out.push((self.rows.len(), 1));
    }
    fn cost(&self, j: usize) -> i64 {
        self.costs[j]
    }
}

/// Common multiplier that makes every finite cost, divided by `ell`, integral.
fn scale_factor(gamma: &ValuedStructure, ell: usize) -> BigInt {
    let mut den = BigInt::one();
    for r in gamma.relations() {
        for c in r.table() {
            if let Some(v) = c.finite() {
                den = den.lcm(v.denom());
            }
        }
    }
    den * BigInt::from(ell)
}

fn build(
    gamma: &ValuedStructure,
    geo: Geometry,
    cyclic: bool,
    cap: usize,
    cost: impl Fn(&[usize]) -> i64,
) -> Result<Program, FractionalError> {
    let needed = geo.count();
    if needed > cap as u128 {
        return Err(FractionalError::CapExceeded { needed, cap });
    }
    let n = geo.n;
    let ell = geo.ell;
    let factor = Rational::from_integer(scale_factor(gamma, ell));
    let mut scaled = Vec::new();
    for r in gamma.relations() {
        let mut row = Vec::with_capacity(r.len());
        for c in r.table() {
            row.push(match c {
                Cost::Finite(v) => Some((v * &factor).to_integer().to_i64().ok_or(FractionalError::Overflow)?),
                Cost::Infinite => None,
            });
        }
        scaled.push(row);
    }
    let mut rows = Vec::new();
    let mut family = alloc::vec![0; ell];
    let mut args = alloc::vec![0; ell];
    for (rel, r) in gamma.relations().iter().enumerate() {
        let k = r.arity();
        let tuples = r.len();
        let decoded: Vec<Vec<usize>> = (0..tuples).map(|t| r.tuple(t)).collect();
        for idx in 0..tuple_count(ell, tuples) {
            decode_into(idx, tuples, &mut family);
            if cyclic && !is_least_rotation(&family) {
                continue;
            }
            let mut total: i64 = 0;
            let mut finite = true;
            for &t in &family {
                match scaled[rel][t] {
                    Some(v) => total = total.checked_add(v).ok_or(FractionalError::Overflow)?,
                    None => finite = false,
                }
            }
            if !finite {
                continue;
            }
            let points = (0..k)
                .map(|i| {
                    for (j, &t) in family.iter().enumerate() {
                        args[j] = decoded[t][i];
                    }
                    encode(&args, n)
                })
                .collect();
            rows.push(Row {
                rel,
                points,
                rhs: total / ell as i64,
            });
        }
    }
    rows.sort_by(|a, b| (a.rel, &a.points, a.rhs).cmp(&(b.rel, &b.points, b.rhs)));
    // Of two rows with equal left-hand sides the smaller bound dominates.
    rows.dedup_by(|a, b| a.rel == b.rel && a.points == b.points);
    let mut program = Program {
        geo,
        scaled,
        rows,
        codes: Vec::new(),
        costs: Vec::new(),
    };
    // Operations sending a finite family to an infinite tuple get weight 0.
    let mut digits = alloc::vec![0; program.geo.slots];
    for code in 0..needed as usize {
        program.geo.digits(code, &mut digits);
        if program.rows.iter().all(|row| program.entry(row, &digits).is_some()) {
            program.codes.push(code);
            program.costs.push(cost(&digits));
        }
    }
    Ok(program)
}

fn is_least_rotation(family: &[usize]) -> bool {
    let l = family.len();
    (1..l).all(|s| {
        let rotated = family[s..].iter().chain(&family[..s]);
        family.iter().cmp(rotated) != core::cmp::Ordering::Greater
    })
}

/// Searches for a cyclic fractional polymorphism of arity `ell` by a
/// feasibility program over the weights of all cyclic tables.
pub fn find_cyclic_fpol(
    gamma: &ValuedStructure,
    ell: usize,
    cap: usize,
) -> Result<Option<FractionalOperation>, FractionalError> {
    if ell < 2 {
        return Err(FractionalError::ArityTooSmall(2));
    }
    let program = build(gamma, Geometry::cyclic(gamma.domain_size(), ell), true, cap, |_| 0)?;
    if program.codes.is_empty() {
        return Ok(None);
    }
    match program.solve()? {
        ColumnOutcome::Optimal(sol) => {
            let omega = program.operation(&sol)?;
            if !is_fractional_polymorphism(&omega, gamma) || omega.support().iter().any(|(f, _)| !f.is_cyclic()) {
                return Err(FractionalError::Unverified);
            }
            Ok(Some(omega))
        }
        ColumnOutcome::Infeasible => Ok(None),
        ColumnOutcome::Unbounded => Err(FractionalError::Unverified),
    }
}

/// Largest total weight that a 4-ary fractional polymorphism can put on
/// Siggers operations.
pub fn siggers_weight(gamma: &ValuedStructure, cap: usize) -> Result<Rational, FractionalError> {
    let n = gamma.domain_size();
    let program = build(gamma, Geometry::full(n, 4), false, cap, |d| {
        if is_siggers_table(n, |p| d[p]) {
            -1
        } else {
            0
        }
    })?;
    match program.solve()? {
        ColumnOutcome::Optimal(sol) => {
            let omega = program.operation(&sol)?;
            if !is_fractional_polymorphism(&omega, gamma) {
                return Err(FractionalError::Unverified);
            }
            let on_siggers: Rational = omega
                .support()
                .iter()
                .filter(|(f, _)| f.is_siggers())
                .map(|(_, w)| w.clone())
                .sum();
            if on_siggers != -sol.value.clone() {
                return Err(FractionalError::Unverified);
            }
            Ok(on_siggers)
        }
        // The uniform distribution on projections is always feasible.
        ColumnOutcome::Infeasible | ColumnOutcome::Unbounded => Err(FractionalError::Unverified),
    }
}

/// Whether some 4-ary fractional polymorphism has a Siggers operation in its
/// support. By convexity this holds iff the maximal Siggers weight is positive.
pub fn siggers_in_support(gamma: &ValuedStructure, cap: usize) -> Result<bool, FractionalError> {
    Ok(siggers_weight(gamma, cap)?.is_positive())
}

/// Result of shrinking a structure to a core.
#[derive(Clone, Debug)]
pub struct CoreReduction {
    pub structure: ValuedStructure,
    /// Original indices of the surviving elements.
    pub kept: Vec<usize>,
}

/// One reduction step: the image of a non-injective unary operation in the
/// support of some unary fractional polymorphism, if there is one. The program
/// rewards each non-injective map by its image size, so steps shrink the
/// domain gradually; the largest image in the optimal support is chosen.
pub fn core_step(gamma: &ValuedStructure, cap: usize) -> Result<Option<Vec<usize>>, FractionalError> {
    let n = gamma.domain_size();
    if n <= 1 {
        return Ok(None);
    }
    let image_size = |d: &[usize]| {
        let mut seen = alloc::vec![false; n];
        d.iter().filter(|&&v| !core::mem::replace(&mut seen[v], true)).count()
    };
    let program = build(gamma, Geometry::full(n, 1), false, cap, |d| match image_size(d) {
        k if k == n => 0,
        k => -(k as i64),
    })?;
    let ColumnOutcome::Optimal(sol) = program.solve()? else {
        return Err(FractionalError::Unverified);
    };
    if !sol.value.is_negative() {
        return Ok(None);
    }
    let omega = program.operation(&sol)?;
    if !is_fractional_polymorphism(&omega, gamma) {
        return Err(FractionalError::Unverified);
    }
    let image = omega
        .support()
        .iter()
        .filter(|(f, _)| !f.is_injective())
        .map(|(f, _)| f.image())
        .max_by(|a, b| a.len().cmp(&b.len()).then(b.cmp(a)))
        .ok_or(FractionalError::Unverified)?;
    Ok(Some(image))
}

/// Restricts to images of non-injective unary operations until every unary
/// operation in the support of a fractional polymorphism is injective.
pub fn core_reduce(gamma: &ValuedStructure, cap: usize) -> Result<CoreReduction, FractionalError> {
    let mut current = gamma.clone();
    let mut kept: Vec<usize> = (0..gamma.domain_size()).collect();
    while let Some(image) = core_step(&current, cap)? {
        current = current.restrict(&image);
        kept = image.iter().map(|&i| kept[i]).collect();
    }
    if kept.is_empty() && !gamma.elements().is_empty() {
        return Err(FractionalError::Unverified);
    }
    Ok(CoreReduction {
        structure: current,
        kept,
    })
}
