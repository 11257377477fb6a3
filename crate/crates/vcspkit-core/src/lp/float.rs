//! Revised simplex in `f64` with an explicit basis inverse, partial pricing and
//! a fallback to Bland's rule on stalls. Columns come from an oracle so that
//! programs with tens of thousands of columns need not be materialized.

use alloc::vec::Vec;

use super::{LpError, RowKind, FLOAT_TOLERANCE};

pub trait ColumnOracle {
    fn rows(&self) -> usize;
    fn columns(&self) -> usize;
    /// Sparse entries `(row, value)` of structural column `j`.
    fn column(&self, j: usize, out: &mut Vec<(usize, f64)>);
    /// Objective coefficient (minimization).
    fn cost(&self, j: usize) -> f64;
}

#[derive(Clone, Debug)]
pub struct FloatSolution {
    pub value: f64,
    /// Non-zero structural values.
    pub primal: Vec<(usize, f64)>,
    /// Row multipliers `c_B · B⁻¹` in the original row signs.
    pub duals: Vec<f64>,
    /// Basic columns: structural `j < n`, slack of row `i` as `n + i`.
    /// `None` marks a row whose artificial stayed basic at zero.
    pub basis: Vec<Option<usize>>,
    /// Rows sorted by slack: `true` when the row is (nearly) tight.
    pub tight: Vec<bool>,
}

#[derive(Clone, Debug)]
pub enum FloatOutcome {
    Optimal(FloatSolution),
    /// Phase-one multipliers, in the original row signs.
    Infeasible(Vec<f64>),
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const REFACTOR: usize = 64;
const PERTURB: f64 = 1e-7;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Col {
    Structural(usize),
    Slack(usize),
    Artificial(usize),
}

struct State<'a, O: ColumnOracle> {
    oracle: &'a O,
    m: usize,
    n: usize,
    /// Row sign flips making the right-hand side non-negative.
    sign: Vec<f64>,
    /// Slack coefficient per row after the flip (0 for equality rows).
    slack: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<Col>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    scratch: Vec<(usize, f64)>,
    pricing_start: usize,
    iterations: usize,
}

impl<'a, O: ColumnOracle> State<'a, O> {
    fn column_dense(&mut self, c: Col, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match c {
            Col::Structural(j) => {
                let mut buf = core::mem::take(&mut self.scratch);
                self.oracle.column(j, &mut buf);
                for &(i, v) in &buf {
                    out[i] += self.sign[i] * v;
                }
                self.scratch = buf;
            }
            Col::Slack(i) => out[i] = self.slack[i],
            Col::Artificial(i) => out[i] = 1.0,
        }
    }

    fn cost(&self, c: Col, phase1: bool) -> f64 {
        match (c, phase1) {
            (Col::Artificial(_), true) => 1.0,
            (Col::Structural(j), false) => self.oracle.cost(j),
            _ => 0.0,
        }
    }

    fn duals(&self, phase1: bool) -> Vec<f64> {
        let m = self.m;
        let mut y = alloc::vec![0.0; m];
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = self.cost(b, phase1);
            if cb != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yi, v) in y.iter_mut().zip(row) {
                    *yi += cb * v;
                }
            }
        }
        y
    }

    fn reduced_cost(&mut self, c: Col, y: &[f64], phase1: bool) -> f64 {
        let mut d = self.cost(c, phase1);
        match c {
            Col::Structural(j) => {
                let mut buf = core::mem::take(&mut self.scratch);
                self.oracle.column(j, &mut buf);
                for &(i, v) in &buf {
                    d -= y[i] * self.sign[i] * v;
                }
                self.scratch = buf;
            }
            Col::Slack(i) => d -= y[i] * self.slack[i],
            Col::Artificial(i) => d -= y[i],
        }
        d
    }

    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = alloc::vec![0.0; m * m];
        let mut col = alloc::vec![0.0; m];
        for r in 0..m {
            self.column_dense(self.basis[r], &mut col);
            for i in 0..m {
                a[i * m + r] = col[i];
            }
        }
        let mut inv = alloc::vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m).max_by(|&i, &j| a[i * m + c].abs().total_cmp(&a[j * m + c].abs()));
            let Some(p) = p else { return false };
            if a[p * m + c].abs() < 1e-12 {
                return false;
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for i in 0..m {
                if i != c {
                    let f = a[i * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[i * m + k] -= f * a[c * m + k];
                            inv[i * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            self.xb[i] = (0..m).map(|k| self.binv[i * m + k] * self.rhs[k]).sum();
        }
        true
    }

    fn nth(&self, k: usize) -> Col {
        if k < self.n {
            Col::Structural(k)
        } else {
            Col::Slack(k - self.n)
        }
    }

    fn enterable(&self, c: Col) -> bool {
        match c {
            Col::Slack(i) => self.slack[i] != 0.0,
            Col::Structural(_) => true,
            Col::Artificial(_) => false,
        }
    }

    /// Partial pricing: scan blocks from a rotating start, return the most
    /// negative reduced cost of the first block that has one.
    fn price(&mut self, y: &[f64], phase1: bool, bland: bool) -> Option<Col> {
        let total = self.n + self.m;
        if bland {
            for k in 0..total {
                let c = self.nth(k);
                if self.enterable(c) && self.reduced_cost(c, y, phase1) < -COST_TOL {
                    return Some(c);
                }
            }
            return None;
        }
        let block = (total / 8).max(512).min(total);
        let mut scanned = 0;
        let mut best: Option<(Col, f64)> = None;
        let mut k = self.pricing_start % total.max(1);
        while scanned < total {
            let c = self.nth(k);
            if self.enterable(c) {
                let d = self.reduced_cost(c, y, phase1);
                if d < -COST_TOL && best.is_none_or(|(_, b)| d < b) {
                    best = Some((c, d));
                }
            }
            scanned += 1;
            k = (k + 1) % total;
            if scanned % block == 0 && best.is_some() {
                break;
            }
        }
        self.pricing_start = k;
        best.map(|(c, _)| c)
    }

    /// One simplex phase. Returns Ok(false) on unboundedness.
    fn run(&mut self, phase1: bool, limit: usize) -> Result<bool, LpError> {
        let m = self.m;
        let mut w = alloc::vec![0.0; m];
        let mut col = alloc::vec![0.0; m];
        let mut stall = 0usize;
        let mut last_obj = f64::INFINITY;
        loop {
            if self.iterations >= limit {
                return Err(LpError::IterationLimit(limit));
            }
            if self.iterations.is_multiple_of(REFACTOR) && self.iterations > 0 && !self.refactor() {
                return Err(LpError::Unverified("singular basis"));
            }
            let y = self.duals(phase1);
            let bland = stall > 50;
            let Some(q) = self.price(&y, phase1, bland) else {
                return Ok(true);
            };
            self.column_dense(q, &mut col);
            for i in 0..m {
                let row = &self.binv[i * m..(i + 1) * m];
                w[i] = row.iter().zip(&col).map(|(a, b)| a * b).sum();
            }
            // Ratio test; artificials still basic in phase two leave at ratio 0.
            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..m {
                let wi = w[i];
                let ratio = if !phase1 && matches!(self.basis[i], Col::Artificial(_)) && wi.abs() > PIVOT_TOL {
                    0.0
                } else if wi > PIVOT_TOL {
                    self.xb[i].max(0.0) / wi
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((l, r, lw)) => {
                        if bland {
                            ratio < r - 1e-12 || ((ratio - r).abs() <= 1e-12 && key(self.basis[i]) < key(self.basis[l]))
                        } else {
                            ratio < r - 1e-12 || ((ratio - r).abs() <= 1e-12 && wi.abs() > lw)
                        }
                    }
                };
                if better {
                    leave = Some((i, ratio, wi.abs()));
                }
            }
            let Some((r, theta, _)) = leave else {
                return Ok(false);
            };
            for i in 0..m {
                if i != r {
                    self.xb[i] -= theta * w[i];
                }
            }
            self.xb[r] = theta;
            let pr = w[r];
            for k in 0..m {
                self.binv[r * m + k] /= pr;
            }
            for i in 0..m {
                if i != r && w[i] != 0.0 {
                    let f = w[i];
                    for k in 0..m {
                        self.binv[i * m + k] -= f * self.binv[r * m + k];
                    }
                }
            }
            self.basis[r] = q;
            self.iterations += 1;
            let obj: f64 = (0..m).map(|i| self.cost(self.basis[i], phase1) * self.xb[i]).sum();
            if obj < last_obj - 1e-12 {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
        }
    }
}

fn key(c: Col) -> (u8, usize) {
    match c {
        Col::Structural(j) => (0, j),
        Col::Slack(i) => (1, i),
        Col::Artificial(i) => (2, i),
    }
}

/// Minimizes the oracle's objective subject to `rows (kinds) rhs`, `x ≥ 0`.
pub fn solve_float<O: ColumnOracle>(oracle: &O, kinds: &[RowKind], rhs: &[f64]) -> Result<FloatOutcome, LpError> {
    let m = oracle.rows();
    let n = oracle.columns();
    let mut sign = alloc::vec![1.0; m];
    let mut slack = alloc::vec![0.0; m];
    let mut b = alloc::vec![0.0; m];
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        if rhs[i] < 0.0 {
            sign[i] = -1.0;
        }
        b[i] = rhs[i] * sign[i];
        slack[i] = match kinds[i] {
            RowKind::Le => sign[i],
            RowKind::Ge => -sign[i],
            RowKind::Eq => 0.0,
        };
        basis.push(if slack[i] > 0.0 { Col::Slack(i) } else { Col::Artificial(i) });
    }
    // Relaxing rows whose slack starts basic by distinct tiny amounts breaks
    // the degeneracy that otherwise stalls the simplex; the final basis is
    // re-evaluated on the true right-hand side.
    let exact_rhs = b.clone();
    for i in 0..m {
        if slack[i] > 0.0 {
            let jitter = ((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40) as f64 / (1u64 << 24) as f64;
            b[i] += PERTURB * (1.0 + jitter) * b[i].abs().max(1.0);
        }
    }
    let mut binv = alloc::vec![0.0; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }
    let mut st = State {
        oracle,
        m,
        n,
        sign,
        slack,
        rhs: b.clone(),
        basis,
        binv,
        xb: b,
        scratch: Vec::new(),
        pricing_start: 0,
        iterations: 0,
    };
    let limit = 50 * (m + n).max(100);

    if st.basis.iter().any(|c| matches!(c, Col::Artificial(_))) {
        st.run(true, limit)?;
        st.refactor();
        let infeas: f64 = (0..m)
            .filter(|&i| matches!(st.basis[i], Col::Artificial(_)))
            .map(|i| st.xb[i])
            .sum();
        if infeas > FLOAT_TOLERANCE {
            let y = st.duals(true);
            return Ok(FloatOutcome::Infeasible((0..m).map(|i| y[i] * st.sign[i]).collect()));
        }
    }
    if !st.run(false, limit)? {
        return Ok(FloatOutcome::Unbounded);
    }
    st.rhs = exact_rhs;
    st.refactor();
    let y = st.duals(false);
    let mut primal = Vec::new();
    let mut basis_out = Vec::with_capacity(m);
    for (i, &c) in st.basis.iter().enumerate() {
        match c {
            Col::Structural(j) => {
                if st.xb[i].abs() > 1e-12 {
                    primal.push((j, st.xb[i]));
                }
                basis_out.push(Some(j));
            }
            Col::Slack(r) => basis_out.push(Some(n + r)),
            Col::Artificial(_) => basis_out.push(None),
        }
    }
    primal.sort_by_key(|p| p.0);
    let value = primal.iter().map(|&(j, v)| oracle.cost(j) * v).sum();

    // Row activities for tightness reporting.
    let mut activity = alloc::vec![0.0; m];
    let mut buf = Vec::new();
    for &(j, v) in &primal {
        oracle.column(j, &mut buf);
        for &(i, a) in &buf {
            activity[i] += a * v;
        }
    }
    let tight = (0..m).map(|i| (activity[i] - rhs[i]).abs() <= 1e-6).collect();
    Ok(FloatOutcome::Optimal(FloatSolution {
        value,
        primal,
        duals: (0..m).map(|i| y[i] * st.sign[i]).collect(),
        basis: basis_out,
        tight,
    }))
}
