use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{LinearProgram, LpSolution, RowKind};
use crate::cost::Rational;

/// Best rational approximation of `x` with denominator at most `max_den`.
pub fn rationalize(x: f64, max_den: u64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let negative = x < 0.0;
    let mut v = x.abs();
    // Continued-fraction convergents p/q.
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = v as u128;
        let p2 = a.saturating_mul(p1).saturating_add(p0);
        let q2 = a.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den as u128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let f = v - a as f64;
        if f < 1e-15 {
            break;
        }
        v = 1.0 / f;
    }
    if q1 == 0 {
        return Rational::zero();
    }
    let r = Rational::new(BigInt::from(p1), BigInt::from(q1));
    if negative {
        -r
    } else {
        r
    }
}

/// Solves `a x = b` for square `a`; `None` if singular.
fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let m = b.len();
    for c in 0..m {
        let p = (c..m).find(|&i| !a[i][c].is_zero())?;
        a.swap(p, c);
        b.swap(p, c);
        let inv = Rational::one() / &a[c][c];
        for k in c..m {
            if !a[c][k].is_zero() {
                a[c][k] *= &inv;
            }
        }
        b[c] *= &inv;
        let pivot = a[c].clone();
        let bc = b[c].clone();
        for i in 0..m {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in c..m {
                    if !pivot[k].is_zero() {
                        let d = &f * &pivot[k];
                        a[i][k] -= d;
                    }
                }
                b[i] -= &f * &bc;
            }
        }
    }
    Some(b)
}

/// Certifies a basis (structural `j`, or `n + i` for the slack of row `i`) as
/// optimal in exact arithmetic: primal feasible and all reduced costs
/// non-negative. Returns the exact solution on success.
pub fn verify_basis(lp: &LinearProgram, basis: &[Option<usize>]) -> Option<LpSolution> {
    let m = lp.constraints.len();
    let n = lp.num_vars;
    if basis.len() != m || basis.iter().any(|b| b.is_none()) {
        return None;
    }
    let basis: Vec<usize> = basis.iter().map(|b| b.unwrap()).collect();
    let slack_coef = |i: usize| match lp.constraints[i].kind {
        RowKind::Le => Some(Rational::one()),
        RowKind::Ge => Some(-Rational::one()),
        RowKind::Eq => None,
    };
    let mut columns: Vec<Vec<(usize, Rational)>> = alloc::vec![Vec::new(); n];
    for (i, c) in lp.constraints.iter().enumerate() {
        for (j, v) in &c.coeffs {
            columns[*j].push((i, v.clone()));
        }
    }
    let dense = |col: usize| -> Option<Vec<Rational>> {
        let mut out = alloc::vec![Rational::zero(); m];
        if col < n {
            for (i, v) in &columns[col] {
                out[*i] += v;
            }
        } else {
            out[col - n] = slack_coef(col - n)?;
        }
        Some(out)
    };
    let mut b_cols = Vec::with_capacity(m);
    for &c in &basis {
        b_cols.push(dense(c)?);
    }
    // Row-major B for B x = b, and Bᵀ for Bᵀ y = c_B.
    let bmat: Vec<Vec<Rational>> = (0..m).map(|i| (0..m).map(|r| b_cols[r][i].clone()).collect()).collect();
    let rhs: Vec<Rational> = lp.constraints.iter().map(|c| c.rhs.clone()).collect();
    let xb = solve_square(bmat, rhs)?;
    if xb.iter().any(|v| v.is_negative()) {
        return None;
    }
    let cost = |c: usize| if c < n { lp.objective[c].clone() } else { Rational::zero() };
    let cb: Vec<Rational> = basis.iter().map(|&c| cost(c)).collect();
    let y = solve_square(b_cols, cb)?;
    for j in 0..n {
        let mut d = lp.objective[j].clone();
        for (i, v) in &columns[j] {
            d -= &y[*i] * v;
        }
        if d.is_negative() {
            return None;
        }
    }
    for (i, yi) in y.iter().enumerate() {
        if let Some(s) = slack_coef(i) {
            if (-(yi * s)).is_negative() {
                return None;
            }
        }
    }
    let mut primal = alloc::vec![Rational::zero(); n];
    for (r, &c) in basis.iter().enumerate() {
        if c < n {
            primal[c] = xb[r].clone();
        }
    }
    let value = primal
        .iter()
        .zip(&lp.objective)
        .fold(Rational::zero(), |acc, (x, c)| acc + x * c);
    Some(LpSolution {
        value,
        primal,
        duals: y,
    })
}
