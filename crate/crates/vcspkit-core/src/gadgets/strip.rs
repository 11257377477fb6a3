//! Exact minimization for expressions whose atoms only join variables at
//! most two apart in their order: a strip of triangles, solved by dynamic
//! programming over consecutive pairs.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_traits::ToPrimitive;

use super::GadgetError;
use crate::cost::Cost;
use crate::vcsp::{RelRef, TauExpression, ValuedStructure};

pub(crate) const INF: u32 = u32::MAX / 4;

fn add(a: u32, b: u32) -> u32 {
    (a + b).min(INF)
}

/// Costs of a unary or binary atom on `(x_lo, x_hi)`, row-major.
struct PairAtom {
    lo: usize,
    hi: usize,
    table: Vec<u32>,
}

pub(crate) struct Strip {
    n: usize,
    len: usize,
    atoms: Vec<PairAtom>,
}

/// A per-pair additive cost, `INF` to forbid; indexed `x * n + y` for the
/// pair of variables `(k, k+1)`.
pub(crate) type Mask<'a> = (usize, &'a [u32]);

fn small_cost(c: &Cost) -> Result<u32, GadgetError> {
    match c {
        Cost::Infinite => Ok(INF),
        Cost::Finite(r) if r.is_integer() => r
            .to_integer()
            .to_u32()
            .filter(|&v| v < INF)
            .ok_or_else(|| GadgetError::NonIntegralCost(c.to_string())),
        _ => Err(GadgetError::NonIntegralCost(c.to_string())),
    }
}

impl Strip {
    pub(crate) fn new(expr: &TauExpression, gamma: &ValuedStructure) -> Result<Strip, GadgetError> {
        expr.validate(gamma)?;
        let n = gamma.domain_size();
        let len = expr.num_vars();
        let mut atoms = Vec::new();
        for atom in expr.atoms() {
            let (lo, hi) = match atom.args.as_slice() {
                [a] => (*a, *a),
                [a, b] => (*a.min(b), *a.max(b)),
                _ => return Err(GadgetError::NotAStrip(atom.args[0], atom.args[atom.args.len() - 1])),
            };
            if hi - lo > 2 {
                return Err(GadgetError::NotAStrip(lo, hi));
            }
            let mut table = alloc::vec![INF; n * n];
            for x in 0..n {
                for y in 0..n {
                    if lo == hi && x != y {
                        continue;
                    }
                    let tuple: Vec<usize> = match atom.args.as_slice() {
                        [_] => alloc::vec![x],
                        [a, _] if *a == lo && lo != hi => alloc::vec![x, y],
                        [_, _] if lo == hi => alloc::vec![x, x],
                        _ => alloc::vec![y, x],
                    };
                    let c = match atom.rel {
                        RelRef::Empty => Cost::Infinite,
                        r => gamma.cost(r, &tuple),
                    };
                    table[x * n + y] = small_cost(&c)?;
                }
            }
            atoms.push(PairAtom { lo, hi, table });
        }
        let len = len.max(2);
        Ok(Strip { n, len, atoms })
    }

    pub(crate) fn domain_size(&self) -> usize {
        self.n
    }

    fn pairs(&self) -> usize {
        self.len - 1
    }

    /// Sums of atoms whose last variable is `v`: those on `(v-1, v)` and
    /// `(v, v)` indexed by `(x_{v-1}, x_v)`, those on `(v-2, v)` by `(x_{v-2}, x_v)`.
    fn closing(&self, v: usize) -> (Vec<u32>, Vec<u32>) {
        let n = self.n;
        let mut near = alloc::vec![0; n * n];
        let mut far = alloc::vec![0; n * n];
        for a in self.atoms.iter().filter(|a| a.hi == v) {
            for x in 0..n {
                for y in 0..n {
                    let idx = x * n + y;
                    if a.lo == v {
                        near[idx] = add(near[idx], a.table[y * n + y]);
                    } else if a.lo + 1 == v {
                        near[idx] = add(near[idx], a.table[idx]);
                    } else {
                        far[idx] = add(far[idx], a.table[idx]);
                    }
                }
            }
        }
        (near, far)
    }

    fn first_pair(&self) -> Vec<u32> {
        let n = self.n;
        let mut out = alloc::vec![0; n * n];
        for a in self.atoms.iter().filter(|a| a.hi <= 1) {
            for x in 0..n {
                for y in 0..n {
                    let v = match (a.lo, a.hi) {
                        (0, 0) => a.table[x * n + x],
                        (1, 1) => a.table[y * n + y],
                        _ => a.table[x * n + y],
                    };
                    out[x * n + y] = add(out[x * n + y], v);
                }
            }
        }
        out
    }

    fn apply(msg: &mut [u32], masks: &[Mask<'_>], k: usize) {
        for (_, m) in masks.iter().filter(|(j, _)| *j == k) {
            for (c, &extra) in msg.iter_mut().zip(m.iter()) {
                *c = add(*c, extra);
            }
        }
    }

    /// Minimum total cost for each value of the pair `(k, k+1)`, under the
    /// given masks.
    pub(crate) fn profile(&self, k: usize, masks: &[Mask<'_>]) -> Vec<u32> {
        let n = self.n;
        let mut fwd = self.first_pair();
        Self::apply(&mut fwd, masks, 0);
        for j in 0..k {
            let (near, far) = self.closing(j + 2);
            let mut next = alloc::vec![INF; n * n];
            for y in 0..n {
                for z in 0..n {
                    let mut best = INF;
                    for x in 0..n {
                        best = best.min(add(fwd[x * n + y], far[x * n + z]));
                    }
                    next[y * n + z] = add(best, near[y * n + z]);
                }
            }
            fwd = next;
            Self::apply(&mut fwd, masks, j + 1);
        }
        let mut bwd = alloc::vec![0; n * n];
        for j in (k..self.pairs()).rev() {
            if j + 1 < self.pairs() {
                let (near, far) = self.closing(j + 2);
                let mut next = alloc::vec![INF; n * n];
                for x in 0..n {
                    for y in 0..n {
                        let mut best = INF;
                        for z in 0..n {
                            best = best.min(add(add(near[y * n + z], far[x * n + z]), bwd[y * n + z]));
                        }
                        next[x * n + y] = best;
                    }
                }
                bwd = next;
            }
            if j > k {
                Self::apply(&mut bwd, masks, j);
            }
        }
        fwd.iter().zip(bwd.iter()).map(|(&a, &b)| add(a, b)).collect()
    }

    pub(crate) fn minimum(&self, masks: &[Mask<'_>]) -> u32 {
        self.profile(0, masks).into_iter().min().unwrap_or(INF)
    }

    /// An optimal assignment under the masks, or `None` when all are ∞.
    pub(crate) fn argmin(&self, masks: &[Mask<'_>]) -> Option<Vec<usize>> {
        let n = self.n;
        let mut pins: Vec<Vec<u32>> = Vec::new();
        let mut out = Vec::new();
        for k in 0..self.pairs() {
            let mut all: Vec<Mask<'_>> = masks.to_vec();
            all.extend(pins.iter().enumerate().map(|(j, p)| (j, p.as_slice())));
            let prof = self.profile(k, &all);
            let (idx, &best) = prof.iter().enumerate().min_by_key(|(_, &c)| c)?;
            if best >= INF {
                return None;
            }
            let mut pin = alloc::vec![INF; n * n];
            pin[idx] = 0;
            pins.push(pin);
            if k == 0 {
                out.push(idx / n);
            }
            out.push(idx % n);
        }
        Some(out)
    }
}

/// A mask keeping the pairs where `keep` holds.
pub(crate) fn mask_from(n: usize, mut keep: impl FnMut(usize, usize) -> bool) -> Vec<u32> {
    let mut m = alloc::vec![INF; n * n];
    for x in 0..n {
        for y in 0..n {
            if keep(x, y) {
                m[x * n + y] = 0;
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Cost;
    use crate::solve::solve_exact;
    use crate::vcsp::{evaluate, ValuedRelation};
    use proptest::prelude::*;

    fn random_gamma(n: usize, costs: &[u8]) -> ValuedStructure {
        let rel = ValuedRelation::from_table(
            2,
            n,
            (0..n * n)
                .map(|i| match costs[i % costs.len()] {
                    3 => Cost::Infinite,
                    c => Cost::int(c as i64),
                })
                .collect(),
        )
        .unwrap();
        let unary = ValuedRelation::from_fn(1, n, |t| Cost::int((t[0] % 2) as i64));
        ValuedStructure::from_relations(n, [("E", rel), ("U", unary)]).unwrap()
    }

    fn strip_expr(len: usize, atoms: &[(usize, usize, bool)]) -> TauExpression {
        let mut e = TauExpression::with_vars(len);
        for &(a, gap, unary) in atoms {
            let a = a % len;
            if unary {
                e.push(RelRef::Symbol(1), alloc::vec![a]);
            } else {
                let b = (a + 1 + gap % 2).min(len - 1);
                e.push(RelRef::Symbol(0), alloc::vec![b, a]);
            }
        }
        e
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn strip_minimum_matches_branch_and_bound(
            n in 2usize..4,
            len in 2usize..6,
            costs in proptest::collection::vec(0u8..4, 1..9),
            atoms in proptest::collection::vec((0usize..6, 0usize..2, any::<bool>()), 1..8),
            pin in 0usize..16,
        ) {
            let gamma = random_gamma(n, &costs);
            let expr = strip_expr(len, &atoms);
            let strip = Strip::new(&expr, &gamma).unwrap();
            let want = solve_exact(&expr, &gamma).cost;
            let got = strip.minimum(&[]);
            let got_cost = if got >= INF { Cost::Infinite } else { Cost::int(got as i64) };
            prop_assert_eq!(&got_cost, &want);
            if let Some(a) = strip.argmin(&[]) {
                prop_assert_eq!(evaluate(&expr, &gamma, &a), want.clone());
            }
            // A mask on the last pair forces those two variables.
            let (x, y) = (pin % n, (pin / n) % n);
            let m = mask_from(n, |a, b| a == x && b == y);
            let k = len - 2;
            let masked = strip.minimum(&[(k, &m)]);
            let brute = (0..n.pow(len as u32))
                .map(|i| crate::vcsp::decode(i, n, len))
                .filter(|a| a[k] == x && a[k + 1] == y)
                .map(|a| evaluate(&expr, &gamma, &a))
                .fold(Cost::Infinite, Cost::min);
            let masked_cost = if masked >= INF { Cost::Infinite } else { Cost::int(masked as i64) };
            prop_assert_eq!(masked_cost, brute);
        }
    }
}
