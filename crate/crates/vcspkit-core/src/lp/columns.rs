//! Programs with many integer columns, solved by column generation. Every
//! column is priced in exact arithmetic before an answer is returned.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::float::{solve_float, FloatOutcome};
use super::{
    solve_exact, to_f64, verify_basis, DenseOracle, LinearProgram, LpError, LpOutcome, LpSolution, RowKind,
    EXACT_VARIABLE_LIMIT, FLOAT_TOLERANCE,
};
use crate::cost::Rational;

/// A program `min c·x, A x (kinds) b, x ≥ 0` with integer data given column
/// by column.
pub trait IntegerColumns {
    fn rows(&self) -> usize;
    fn columns(&self) -> usize;
    /// Sparse entries `(row, value)` of column `j`.
    fn column(&self, j: usize, out: &mut Vec<(usize, i64)>);
    fn cost(&self, j: usize) -> i64;
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnSolution {
    pub value: Rational,
    /// Non-zero entries of an optimal `x`.
    pub weights: Vec<(usize, Rational)>,
    /// Row multipliers: every column has `c_j - y·A_j ≥ 0`.
    pub duals: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnOutcome {
    Optimal(ColumnSolution),
    Infeasible,
    Unbounded,
}

/// Columns added per pricing round.
const BATCH: usize = 64;
const ROUND_LIMIT: usize = 10_000;

fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// Reduced costs `c_j - y·A_j`, scaled by a positive common denominator of
/// `y`, for all columns; computed in `i128` when that cannot overflow.
struct Pricer {
    scaled: Vec<BigInt>,
    small: Option<Vec<i128>>,
    denom: BigInt,
}

impl Pricer {
    fn new(y: &[Rational]) -> Pricer {
        let denom = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let scaled: Vec<BigInt> = y.iter().map(|v| v.numer() * (&denom / v.denom())).collect();
        // Checked i128 arithmetic below falls back to BigInt on overflow.
        let small = scaled
            .iter()
            .chain(core::iter::once(&denom))
            .map(|v| v.to_i128().filter(|x| x.abs() < (1i128 << 56)))
            .collect::<Option<Vec<i128>>>()
            .map(|mut v| {
                v.pop();
                v
            });
        Pricer { scaled, small, denom }
    }

    /// True when the reduced cost is negative; also returns it as `f64` for ranking.
    fn negative(&self, cost: i64, col: &[(usize, i64)]) -> Option<f64> {
        if let (Some(y), Some(d)) = (&self.small, self.denom.to_i128()) {
            let mut acc = Some((cost as i128).checked_mul(d));
            for &(i, a) in col {
                acc = acc.map(|s| s.and_then(|s| y[i].checked_mul(a as i128).and_then(|p| s.checked_sub(p))));
            }
            if let Some(Some(v)) = acc {
                return (v < 0).then(|| v as f64 / d as f64);
            }
        }
        let mut v = BigInt::from(cost) * &self.denom;
        for &(i, a) in col {
            v -= &self.scaled[i] * a;
        }
        v.is_negative()
            .then(|| v.to_f64().unwrap_or(-1.0) / self.denom.to_f64().unwrap_or(1.0))
    }
}

struct Restricted {
    /// Real column ids in restricted order.
    cols: Vec<usize>,
    in_set: Vec<bool>,
}

impl Restricted {
    fn add(&mut self, j: usize) {
        if !self.in_set[j] {
            self.in_set[j] = true;
            self.cols.push(j);
        }
    }
}

fn restricted_program<C: IntegerColumns>(
    src: &C,
    set: &Restricted,
    kinds: &[RowKind],
    rhs: &[i64],
    phase1: bool,
) -> (LinearProgram, usize) {
    let m = src.rows();
    let mut arts = Vec::new();
    if phase1 {
        for (i, (&k, &b)) in kinds.iter().zip(rhs).enumerate() {
            let coef = match k {
                RowKind::Le if b < 0 => -1,
                RowKind::Ge if b > 0 => 1,
                RowKind::Eq if b != 0 => b.signum(),
                _ => continue,
            };
            arts.push((i, coef));
        }
    }
    let n = set.cols.len() + arts.len();
    let mut lp = LinearProgram::new(n);
    let mut rows: Vec<Vec<(usize, Rational)>> = alloc::vec![Vec::new(); m];
    let mut buf = Vec::new();
    for (k, &j) in set.cols.iter().enumerate() {
        src.column(j, &mut buf);
        for &(i, a) in &buf {
            rows[i].push((k, int(a)));
        }
        if !phase1 {
            lp.objective[k] = int(src.cost(j));
        }
    }
    for (a, &(i, coef)) in arts.iter().enumerate() {
        let k = set.cols.len() + a;
        rows[i].push((k, int(coef)));
        lp.objective[k] = Rational::one();
    }
    for (i, row) in rows.into_iter().enumerate() {
        lp.add(row, kinds[i], int(rhs[i]));
    }
    (lp, set.cols.len())
}

/// Restricted program solved in floating point, with the exact solution of
/// the same basis when it certifies.
struct Round {
    float_value: f64,
    float_duals: Option<Vec<f64>>,
    exact: Option<LpSolution>,
}

fn solve_round(lp: &LinearProgram, certify: bool) -> Result<Round, LpError> {
    let kinds: Vec<RowKind> = lp.constraints.iter().map(|c| c.kind).collect();
    let rhs: Vec<f64> = lp.constraints.iter().map(|c| to_f64(&c.rhs)).collect();
    if let FloatOutcome::Optimal(sol) = solve_float(&DenseOracle::new(lp), &kinds, &rhs)? {
        if !certify {
            return Ok(Round {
                float_value: sol.value,
                float_duals: Some(sol.duals),
                exact: None,
            });
        }
        if let Some(exact) = verify_basis(lp, &fill_basis(lp, &sol.basis)) {
            return Ok(Round {
                float_value: sol.value,
                float_duals: Some(sol.duals),
                exact: Some(exact),
            });
        }
    }
    match solve_exact(lp) {
        LpOutcome::Optimal(s) => Ok(Round {
            float_value: f64::NAN,
            float_duals: None,
            exact: Some(s),
        }),
        // Restricted programs carry artificials in phase one and inherit a
        // feasible point in phase two.
        LpOutcome::Infeasible => Err(LpError::Unverified("restricted program lost feasibility")),
        LpOutcome::Unbounded => Ok(Round {
            float_value: f64::NAN,
            float_duals: None,
            exact: None,
        }),
    }
}

/// Rows whose artificial stayed basic at zero get their slack instead.
fn fill_basis(lp: &LinearProgram, basis: &[Option<usize>]) -> Vec<Option<usize>> {
    basis
        .iter()
        .enumerate()
        .map(|(i, b)| b.or_else(|| (lp.constraints[i].kind != RowKind::Eq).then_some(lp.num_vars + i)))
        .collect()
}

/// Solves the program exactly by column generation. Restricted programs are
/// solved in floating point and priced against every column; once floating
/// point pricing finds nothing, the basis is certified and every column is
/// priced again in exact arithmetic.
pub fn solve_columns<C: IntegerColumns>(src: &C, kinds: &[RowKind], rhs: &[i64]) -> Result<ColumnOutcome, LpError> {
    let n = src.columns();
    let mut set = Restricted {
        cols: Vec::new(),
        in_set: alloc::vec![false; n],
    };
    if n <= EXACT_VARIABLE_LIMIT {
        (0..n).for_each(|j| set.add(j));
    }
    let mut buf = Vec::new();
    let mut fbuf = Vec::new();
    for phase1 in [true, false] {
        let cost = |j: usize| if phase1 { 0 } else { src.cost(j) };
        let mut rounds = 0;
        let mut certify = false;
        loop {
            rounds += 1;
            if rounds > ROUND_LIMIT {
                return Err(LpError::IterationLimit(ROUND_LIMIT));
            }
            let (lp, real) = restricted_program(src, &set, kinds, rhs, phase1);
            let round = solve_round(&lp, certify)?;
            let Some(sol) = round.exact else {
                if let Some(y) = round.float_duals {
                    // A zero phase-one value only needs certifying.
                    if phase1 && round.float_value.abs() <= FLOAT_TOLERANCE {
                        certify = true;
                        continue;
                    }
                    let mut entering: Vec<(f64, usize)> = Vec::new();
                    for j in (0..n).filter(|&j| !set.in_set[j]) {
                        src.column(j, &mut buf);
                        fbuf.clear();
                        fbuf.extend(buf.iter().map(|&(i, a)| (i, a as f64)));
                        let d = cost(j) as f64 - fbuf.iter().map(|&(i, a)| y[i] * a).sum::<f64>();
                        if d < -FLOAT_TOLERANCE {
                            entering.push((d, j));
                        }
                    }
                    if entering.is_empty() {
                        certify = true;
                    } else {
                        add_best(&mut set, entering);
                    }
                    continue;
                }
                debug_assert!(!phase1, "phase one is bounded below by zero");
                return Ok(ColumnOutcome::Unbounded);
            };
            certify = false;
            if phase1 && sol.value.is_zero() {
                break;
            }
            let pricer = Pricer::new(&sol.duals);
            let mut entering: Vec<(f64, usize)> = Vec::new();
            for j in (0..n).filter(|&j| !set.in_set[j]) {
                src.column(j, &mut buf);
                if let Some(d) = pricer.negative(cost(j), &buf) {
                    entering.push((d, j));
                }
            }
            if !entering.is_empty() {
                add_best(&mut set, entering);
                continue;
            }
            if phase1 {
                return Ok(ColumnOutcome::Infeasible);
            }
            let weights = set
                .cols
                .iter()
                .zip(&sol.primal[..real])
                .filter(|(_, x)| !x.is_zero())
                .map(|(&j, x)| (j, x.clone()))
                .collect();
            return Ok(ColumnOutcome::Optimal(ColumnSolution {
                value: sol.value,
                weights,
                duals: sol.duals,
            }));
        }
    }
    unreachable!("phase two always returns")
}

fn add_best(set: &mut Restricted, mut entering: Vec<(f64, usize)>) {
    entering.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    for &(_, j) in entering.iter().take(BATCH) {
        set.add(j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::frac;

    /// Columns `x_j` with `x_j ≤ 1`-style rows built from a seed table.
    struct Table {
        rows: usize,
        cols: Vec<Vec<(usize, i64)>>,
        costs: Vec<i64>,
    }

    impl IntegerColumns for Table {
        fn rows(&self) -> usize {
            self.rows
        }
        fn columns(&self) -> usize {
            self.cols.len()
        }
        fn column(&self, j: usize, out: &mut Vec<(usize, i64)>) {
            out.clear();
            out.extend_from_slice(&self.cols[j]);
        }
        fn cost(&self, j: usize) -> i64 {
            self.costs[j]
        }
    }

    fn to_dense(t: &Table, kinds: &[RowKind], rhs: &[i64]) -> LinearProgram {
        let mut lp = LinearProgram::new(t.cols.len());
        let mut rows = alloc::vec![Vec::new(); t.rows];
        for (j, c) in t.cols.iter().enumerate() {
            lp.objective[j] = int(t.costs[j]);
            for &(i, a) in c {
                rows[i].push((j, int(a)));
            }
        }
        for (i, r) in rows.into_iter().enumerate() {
            lp.add(r, kinds[i], int(rhs[i]));
        }
        lp
    }

    fn random_table(seed: u64, cols: usize) -> Table {
        let mut s = seed;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        };
        let rows = 4;
        let mut t = Table {
            rows: rows + 1,
            cols: Vec::new(),
            costs: Vec::new(),
        };
        for _ in 0..cols {
            let mut c: Vec<(usize, i64)> = (0..rows).map(|i| (i, (next() % 7) as i64 - 3)).collect();
            c.push((rows, 1));
            t.cols.push(c);
            t.costs.push((next() % 9) as i64 - 4);
        }
        t
    }

    #[test]
    fn agrees_with_the_dense_simplex() {
        for seed in 1..12u64 {
            let t = random_table(seed * 7919, 3000);
            let mut kinds = alloc::vec![RowKind::Le; 4];
            kinds.push(RowKind::Eq);
            let rhs = [0, 1, -1, 2, 1];
            let got = solve_columns(&t, &kinds, &rhs).unwrap();
            let want = solve_exact(&to_dense(&t, &kinds, &rhs));
            match (got, want) {
                (ColumnOutcome::Optimal(a), LpOutcome::Optimal(b)) => assert_eq!(a.value, b.value),
                (ColumnOutcome::Infeasible, LpOutcome::Infeasible) => {}
                (a, b) => panic!("seed {seed}: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn small_program_is_solved_directly() {
        // min -x0 - x1 with x0 + x1 = 1 and x0 ≤ 1/2 written as 2x0 ≤ 1.
        let t = Table {
            rows: 2,
            cols: alloc::vec![alloc::vec![(0, 1), (1, 2)], alloc::vec![(0, 1)]],
            costs: alloc::vec![-2, -1],
        };
        let out = solve_columns(&t, &[RowKind::Eq, RowKind::Le], &[1, 1]).unwrap();
        let ColumnOutcome::Optimal(s) = out else { panic!("{out:?}") };
        assert_eq!(s.value, frac(-3, 2));
    }
}
