//! Dense two-phase tableau simplex over exact rationals with Bland's rule.

use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{LinearProgram, LpOutcome, LpSolution, RowKind};
use crate::cost::Rational;

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs, with the negated objective value in the last column.
    obj: Vec<Rational>,
    basic: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let inv = Rational::one() / &self.rows[r][q];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        let nz: Vec<usize> = (0..=self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[q].is_zero() {
                continue;
            }
            let f = row[q].clone();
            for &j in &nz {
                let d = &f * &pivot_row[j];
                row[j] -= d;
            }
        }
        if !self.obj[q].is_zero() {
            let f = self.obj[q].clone();
            for &j in &nz {
                let d = &f * &pivot_row[j];
                self.obj[j] -= d;
            }
        }
        self.basic[r] = q;
    }

    /// Runs Bland's rule over columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(q) = (0..allowed).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][q];
                if a.is_positive() {
                    let ratio = self.rhs(i) / a;
                    let better = match &leave {
                        None => true,
                        Some((l, best)) => ratio < *best || (ratio == *best && self.basic[i] < self.basic[*l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, q),
                None => return false,
            }
        }
    }

    fn set_objective(&mut self, cost: &[Rational]) {
        let mut obj = alloc::vec![Rational::zero(); self.width + 1];
        obj[..cost.len()].clone_from_slice(cost);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = obj[self.basic[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    obj[j] -= &cb * v;
                }
            }
        }
        self.obj = obj;
    }
}

pub fn solve_exact(lp: &LinearProgram) -> LpOutcome {
    let m = lp.constraints.len();
    let n = lp.num_vars;

    // Normalize to non-negative right-hand sides.
    let mut signs = Vec::with_capacity(m);
    let mut kinds = Vec::with_capacity(m);
    for c in &lp.constraints {
        let neg = c.rhs.is_negative();
        signs.push(neg);
        kinds.push(match (c.kind, neg) {
            (RowKind::Le, true) => RowKind::Ge,
            (RowKind::Ge, true) => RowKind::Le,
            (k, _) => k,
        });
    }
    let slack_count = kinds.iter().filter(|k| **k != RowKind::Eq).count();
    let art_count = kinds.iter().filter(|k| **k != RowKind::Le).count();
    let width = n + slack_count + art_count;

    let mut rows = Vec::with_capacity(m);
    let mut basic = Vec::with_capacity(m);
    let mut init_col = Vec::with_capacity(m);
    let (mut s, mut a) = (n, n + slack_count);
    for (i, c) in lp.constraints.iter().enumerate() {
        let mut row = alloc::vec![Rational::zero(); width + 1];
        for (j, v) in &c.coeffs {
            row[*j] += v;
        }
        row[width] = c.rhs.clone();
        if signs[i] {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        match kinds[i] {
            RowKind::Le => {
                row[s] = Rational::one();
                basic.push(s);
                init_col.push(s);
                s += 1;
            }
            RowKind::Ge => {
                row[s] = -Rational::one();
                row[a] = Rational::one();
                basic.push(a);
                init_col.push(a);
                s += 1;
                a += 1;
            }
            RowKind::Eq => {
                row[a] = Rational::one();
                basic.push(a);
                init_col.push(a);
                a += 1;
            }
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: Vec::new(),
        basic,
        width,
    };
    let art_start = n + slack_count;

    if art_count > 0 {
        let mut phase1 = alloc::vec![Rational::zero(); width];
        for c in phase1.iter_mut().skip(art_start) {
            *c = Rational::one();
        }
        t.set_objective(&phase1);
        t.optimize(width);
        if !t.obj[width].is_zero() {
            return LpOutcome::Infeasible;
        }
        // Pivot artificials out of the basis where possible.
        for r in 0..m {
            if t.basic[r] >= art_start {
                if let Some(q) = (0..art_start).find(|&j| !t.rows[r][j].is_zero()) {
                    t.pivot(r, q);
                }
            }
        }
    }

    let mut cost = lp.objective.clone();
    cost.resize(width, Rational::zero());
    t.set_objective(&cost);
    if !t.optimize(art_start) {
        return LpOutcome::Unbounded;
    }

    let mut primal = alloc::vec![Rational::zero(); n];
    for (i, &b) in t.basic.iter().enumerate() {
        if b < n {
            primal[b] = t.rhs(i).clone();
        }
    }
    let value = primal
        .iter()
        .zip(&lp.objective)
        .filter(|(x, _)| !x.is_zero())
        .fold(Rational::zero(), |acc, (x, c)| acc + x * c);
    let duals = (0..m)
        .map(|i| {
            let y = -t.obj[init_col[i]].clone();
            if signs[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    LpOutcome::Optimal(LpSolution {
        value,
        primal,
        duals,
    })
}
