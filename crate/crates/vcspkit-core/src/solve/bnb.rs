//! Depth-first branch and bound over a static variable order.
//!
//! For every summand the bound tables hold, for each prefix of its variables
//! (in search order), the minimum cost over all completions of the remaining
//! ones. The lower bound of a node is the sum of these over all summands.

use alloc::vec::Vec;
use core::ops::{Add, Sub};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::cost::{common_denominator, Cost, Rational};
use crate::vcsp::{evaluate, tuple_count, TauExpression, ValuedStructure};

pub(crate) trait Value: Clone + Ord + for<'a> Add<&'a Self, Output = Self> + for<'a> Sub<&'a Self, Output = Self> {
    fn zero() -> Self;
}

impl Value for i128 {
    fn zero() -> i128 {
        0
    }
}

impl Value for Rational {
    fn zero() -> Rational {
        <Rational as Zero>::zero()
    }
}

struct Summand<V> {
    /// `stages[j]` is indexed by the values of the first `j` distinct
    /// variables in search order.
    stages: Vec<Vec<Option<V>>>,
}

struct Prepared<V> {
    n_vars: usize,
    dom: usize,
    order: Vec<usize>,
    summands: Vec<Summand<V>>,
    /// Summands whose next unassigned variable is the one at this depth.
    touched: Vec<Vec<usize>>,
    root: Option<V>,
}

enum Mode<'a, V> {
    Minimize,
    /// Stop at the first leaf of cost at most the bound.
    First(&'a V),
    /// Collect every leaf of cost at most the bound (any finite cost if none).
    All(Option<&'a V>),
}

impl<V> Clone for Mode<'_, V> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<V> Copy for Mode<'_, V> {}

/// Best value, its assignment, collected solutions and nodes explored.
type RunOutcome<V> = (Option<V>, Option<Vec<usize>>, Vec<Vec<usize>>, u64);

struct Run<'a, V> {
    p: &'a Prepared<V>,
    pins: &'a [Option<usize>],
    level: Vec<usize>,
    code: Vec<usize>,
    cur: Vec<V>,
    assign: Vec<usize>,
    best: Option<V>,
    best_assign: Option<Vec<usize>>,
    all: Vec<Vec<usize>>,
    limit: usize,
    nodes: u64,
    done: bool,
}

impl<V: Value> Prepared<V> {
    fn new(expr: &TauExpression, gamma: &ValuedStructure, order: Vec<usize>, convert: &dyn Fn(&Cost) -> Option<V>) -> Prepared<V> {
        let n_vars = expr.num_vars();
        let dom = gamma.domain_size();
        let mut depth_of = alloc::vec![0; n_vars];
        for (d, &v) in order.iter().enumerate() {
            depth_of[v] = d;
        }
        let mut touched = alloc::vec![Vec::new(); n_vars];
        let mut summands = Vec::new();
        for (s, atom) in expr.atoms().iter().enumerate() {
            let mut vars: Vec<usize> = atom.args.clone();
            vars.sort_by_key(|&v| depth_of[v]);
            vars.dedup();
            let arg_pos: Vec<usize> = atom
                .args
                .iter()
                .map(|a| vars.iter().position(|v| v == a).expect("argument is among vars"))
                .collect();
            let r = vars.len();
            let mut full = Vec::with_capacity(tuple_count(r, dom));
            let mut vals = alloc::vec![0; r];
            let mut tuple = alloc::vec![0; arg_pos.len()];
            for idx in 0..tuple_count(r, dom) {
                crate::vcsp::decode_into(idx, dom, &mut vals);
                for (t, &p) in tuple.iter_mut().zip(&arg_pos) {
                    *t = vals[p];
                }
                full.push(convert(&gamma.cost(atom.rel, &tuple)));
            }
            let mut stages = alloc::vec![Vec::new(); r + 1];
            stages[r] = full;
            for j in (0..r).rev() {
                let next = &stages[j + 1];
                let mut cur = Vec::with_capacity(next.len() / dom.max(1));
                for chunk in next.chunks(dom.max(1)) {
                    cur.push(chunk.iter().flatten().min().cloned());
                }
                if dom == 0 {
                    cur.push(None);
                }
                stages[j] = cur;
            }
            for &v in &vars {
                touched[depth_of[v]].push(s);
            }
            summands.push(Summand { stages });
        }
        let mut root = Some(V::zero());
        for s in &summands {
            root = match (root, &s.stages[0][0]) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
        }
        Prepared {
            n_vars,
            dom,
            order,
            summands,
            touched,
            root,
        }
    }

    fn run(&self, pins: &[Option<usize>], mode: Mode<'_, V>, limit: usize) -> RunOutcome<V> {
        let Some(root) = self.root.clone() else {
            return (None, None, Vec::new(), 1);
        };
        if self.n_vars > 0 && self.dom == 0 {
            return (None, None, Vec::new(), 1);
        }
        let mut run = Run {
            p: self,
            pins,
            level: alloc::vec![0; self.summands.len()],
            code: alloc::vec![0; self.summands.len()],
            cur: self.summands.iter().map(|s| s.stages[0][0].clone().expect("root is finite")).collect(),
            assign: alloc::vec![0; self.n_vars],
            best: None,
            best_assign: None,
            all: Vec::new(),
            limit,
            nodes: 0,
            done: false,
        };
        run.dfs(0, root, mode);
        (run.best, run.best_assign, run.all, run.nodes)
    }
}

impl<'a, V: Value> Run<'a, V> {
    fn prune(&self, bound: &V, mode: Mode<'_, V>) -> bool {
        match mode {
            Mode::Minimize => self.best.as_ref().is_some_and(|b| bound >= b),
            Mode::First(u) | Mode::All(Some(u)) => bound > u,
            Mode::All(None) => false,
        }
    }

    fn dfs(&mut self, depth: usize, bound: V, mode: Mode<'_, V>) {
        self.nodes += 1;
        if depth == self.p.order.len() {
            match mode {
                Mode::Minimize => {
                    self.best = Some(bound);
                    self.best_assign = Some(self.assign.clone());
                }
                Mode::First(_) => {
                    self.best = Some(bound);
                    self.best_assign = Some(self.assign.clone());
                    self.done = true;
                }
                Mode::All(_) => {
                    self.all.push(self.assign.clone());
                    if self.all.len() >= self.limit {
                        self.done = true;
                    }
                }
            }
            return;
        }
        let p = self.p;
        let v = p.order[depth];
        let touched = &p.touched[depth];
        let (lo, hi) = match self.pins[v] {
            Some(a) => (a, a + 1),
            // A variable in no summand only needs its least value unless
            // every solution is wanted.
            None if touched.is_empty() && !matches!(mode, Mode::All(_)) => (0, 1),
            None => (0, p.dom),
        };
        let saved: Vec<(usize, usize, V)> = touched.iter().map(|&s| (self.level[s], self.code[s], self.cur[s].clone())).collect();
        for a in lo..hi {
            let mut nb = bound.clone();
            let mut feasible = true;
            let mut fresh = Vec::with_capacity(touched.len());
            for (k, &s) in touched.iter().enumerate() {
                let (lvl, code, ref old) = saved[k];
                let c = code * p.dom + a;
                match &p.summands[s].stages[lvl + 1][c] {
                    Some(val) => {
                        nb = nb + val - old;
                        fresh.push((c, val.clone()));
                    }
                    None => {
                        feasible = false;
                        break;
                    }
                }
            }
            if !feasible || self.prune(&nb, mode) {
                continue;
            }
            for (k, &s) in touched.iter().enumerate() {
                self.level[s] = saved[k].0 + 1;
                self.code[s] = fresh[k].0;
                self.cur[s] = fresh[k].1.clone();
            }
            self.assign[v] = a;
            self.dfs(depth + 1, nb, mode);
            for (k, &s) in touched.iter().enumerate() {
                self.level[s] = saved[k].0;
                self.code[s] = saved[k].1;
                self.cur[s] = saved[k].2.clone();
            }
            if self.done {
                return;
            }
        }
    }
}

enum Engine {
    Int(Prepared<i128>, Prepared<i128>),
    Big(Prepared<Rational>, Prepared<Rational>),
}

/// A prepared minimizer for one expression over one structure.
pub struct Minimizer<'a> {
    expr: &'a TauExpression,
    gamma: &'a ValuedStructure,
    scale: BigInt,
    engine: Engine,
}

/// Search order: descending number of incident summands, ties by index.
fn degree_order(expr: &TauExpression) -> Vec<usize> {
    let mut degree = alloc::vec![0usize; expr.num_vars()];
    for a in expr.atoms() {
        let mut seen: Vec<usize> = a.args.clone();
        seen.sort_unstable();
        seen.dedup();
        for v in seen {
            degree[v] += 1;
        }
    }
    let mut order: Vec<usize> = (0..expr.num_vars()).collect();
    order.sort_by_key(|&v| core::cmp::Reverse(degree[v]));
    order
}

impl<'a> Minimizer<'a> {
    pub fn new(expr: &'a TauExpression, gamma: &'a ValuedStructure) -> Minimizer<'a> {
        let mut used = Vec::new();
        for a in expr.atoms() {
            if let crate::vcsp::RelRef::Symbol(i) = a.rel {
                if !used.contains(&i) {
                    used.push(i);
                }
            }
        }
        let scale = common_denominator(used.iter().flat_map(|&i| gamma.relation(i).table().iter()));
        let fits = used.iter().all(|&i| {
            gamma.relation(i).table().iter().all(|c| match c {
                Cost::Finite(r) => (r * Rational::from_integer(scale.clone())).to_integer().to_i64().is_some(),
                Cost::Infinite => true,
            })
        });
        let forward = degree_order(expr);
        let identity: Vec<usize> = (0..expr.num_vars()).collect();
        let engine = if fits {
            let s = scale.clone();
            let conv = move |c: &Cost| {
                c.finite()
                    .map(|r| (r * Rational::from_integer(s.clone())).to_integer().to_i128().expect("checked to fit"))
            };
            Engine::Int(
                Prepared::new(expr, gamma, forward, &conv),
                Prepared::new(expr, gamma, identity, &conv),
            )
        } else {
            let conv = |c: &Cost| c.finite().cloned();
            Engine::Big(
                Prepared::new(expr, gamma, forward, &conv),
                Prepared::new(expr, gamma, identity, &conv),
            )
        };
        Minimizer {
            expr,
            gamma,
            scale,
            engine,
        }
    }

    fn unscale_int(&self, v: i128) -> Cost {
        Cost::Finite(Rational::new(BigInt::from(v), self.scale.clone()))
    }

    /// Minimum cost with some variables fixed.
    pub fn minimum(&self, pins: &[Option<usize>]) -> Cost {
        match &self.engine {
            Engine::Int(p, _) => p.run(pins, Mode::Minimize, 0).0.map_or(Cost::Infinite, |v| self.unscale_int(v)),
            Engine::Big(p, _) => p.run(pins, Mode::Minimize, 0).0.map_or(Cost::Infinite, Cost::Finite),
        }
    }

    /// Exact optimum with the lexicographically least optimal assignment.
    pub fn solve(&self) -> OptResult {
        let n = self.expr.num_vars();
        let pins = alloc::vec![None; n];
        let (witness, nodes) = match &self.engine {
            Engine::Int(fwd, lex) => {
                let (best, _, _, n1) = fwd.run(&pins, Mode::Minimize, 0);
                match best {
                    None => (None, n1),
                    Some(b) => {
                        let (_, w, _, n2) = lex.run(&pins, Mode::First(&b), 0);
                        (w, n1 + n2)
                    }
                }
            }
            Engine::Big(fwd, lex) => {
                let (best, _, _, n1) = fwd.run(&pins, Mode::Minimize, 0);
                match best {
                    None => (None, n1),
                    Some(b) => {
                        let (_, w, _, n2) = lex.run(&pins, Mode::First(&b), 0);
                        (w, n1 + n2)
                    }
                }
            }
        };
        let cost = witness
            .as_ref()
            .map_or(Cost::Infinite, |w| evaluate(self.expr, self.gamma, w));
        OptResult {
            cost,
            witness,
            nodes_explored: nodes,
        }
    }

    /// Every assignment of cost at most `bound` (up to `limit`), sorted.
    pub fn solutions_within(&self, bound: &Cost, limit: usize) -> Vec<Vec<usize>> {
        let pins = alloc::vec![None; self.expr.num_vars()];
        let mut out = match (&self.engine, bound) {
            (Engine::Int(fwd, _), Cost::Finite(r)) => {
                let scaled = r * Rational::from_integer(self.scale.clone());
                match scaled.floor().to_integer().to_i128() {
                    Some(b) => fwd.run(&pins, Mode::All(Some(&b)), limit).2,
                    None => fwd.run(&pins, Mode::All(None), limit).2,
                }
            }
            (Engine::Big(fwd, _), Cost::Finite(r)) => fwd.run(&pins, Mode::All(Some(r)), limit).2,
            (Engine::Int(fwd, _), Cost::Infinite) => fwd.run(&pins, Mode::All(None), limit).2,
            (Engine::Big(fwd, _), Cost::Infinite) => fwd.run(&pins, Mode::All(None), limit).2,
        };
        out.sort();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptResult {
    pub cost: Cost,
    pub witness: Option<Vec<usize>>,
    pub nodes_explored: u64,
}

/// Exact minimum of `expr` over `gamma` by branch and bound.
pub fn solve_exact(expr: &TauExpression, gamma: &ValuedStructure) -> OptResult {
    Minimizer::new(expr, gamma).solve()
}
