use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::BagDatabase;
use crate::cost::Cost;
use crate::query::{enumerate_homomorphisms, UnionQuery};

/// Weighted hypergraph whose minimum hitting sets are the cheapest removals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HittingSetInstance {
    /// Vertex identities as `(relation, tuple)`.
    pub vertices: Vec<(usize, Vec<usize>)>,
    pub weights: Vec<u64>,
    /// Sorted vertex ids; no edge contains another.
    pub edges: Vec<Vec<usize>>,
    /// Some match uses no removable vertex, so nothing can be hit.
    pub infeasible: bool,
}

impl HittingSetInstance {
    /// Normalizes the edges: sorts them, removes duplicates and supersets.
    /// An empty edge sets the infeasible flag.
    pub fn new(
        vertices: Vec<(usize, Vec<usize>)>,
        weights: Vec<u64>,
        edges: impl IntoIterator<Item = Vec<usize>>,
        infeasible: bool,
    ) -> HittingSetInstance {
        let mut infeasible = infeasible;
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for mut e in edges {
            e.sort_unstable();
            e.dedup();
            if e.is_empty() {
                infeasible = true;
            } else {
                set.insert(e);
            }
        }
        let mut sorted: Vec<Vec<usize>> = set.into_iter().collect();
        sorted.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        let mut kept: Vec<Vec<usize>> = Vec::new();
        for e in sorted {
            if !kept.iter().any(|k| is_subset(k, &e)) {
                kept.push(e);
            }
        }
        kept.sort();
        HittingSetInstance {
            vertices,
            weights,
            edges: kept,
            infeasible,
        }
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut it = b.iter();
    a.iter().all(|x| it.any(|y| y == x))
}

/// One edge per match of a disjunct, holding the removable tuples it uses.
pub fn build_hitting_set(db: &BagDatabase, mu: &UnionQuery) -> HittingSetInstance {
    let facts: Vec<_> = db.facts().into_iter().filter(|f| !f.exogenous).collect();
    let vertices: Vec<(usize, Vec<usize>)> = facts.iter().map(|f| (f.rel, f.tuple.clone())).collect();
    let weights = facts.iter().map(|f| f.mult).collect();
    let structure = db.to_structure();
    let mut edges = Vec::new();
    let mut infeasible = false;
    for d in mu.disjuncts() {
        let canon = d.canonical_database();
        for h in enumerate_homomorphisms(&canon, &structure, None) {
            let mut edge = Vec::new();
            for atom in d.atoms() {
                let rel = db.signature().index_of(mu.signature().name(atom.relation)).expect("shared signature");
                let image: Vec<usize> = atom.args.iter().map(|&v| h[v]).collect();
                if let Ok(i) = vertices.binary_search(&(rel, image)) {
                    edge.push(i);
                }
            }
            if edge.is_empty() {
                infeasible = true;
            }
            edges.push(edge);
        }
    }
    HittingSetInstance::new(vertices, weights, edges, infeasible)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HittingSolution {
    /// Minimum total weight, or ∞ when infeasible.
    pub cost: Cost,
    /// Sorted chosen vertex ids.
    pub chosen: Vec<usize>,
}

struct Search<'a> {
    inst: &'a HittingSetInstance,
    chosen: Vec<bool>,
    forbidden: Vec<bool>,
    best: u64,
    best_set: Option<Vec<usize>>,
    /// Stop at the first solution within the bound.
    decide: bool,
}

impl Search<'_> {
    fn covered(&self, e: &[usize]) -> bool {
        e.iter().any(|&v| self.chosen[v])
    }

    fn dfs(&mut self, cost: u64) {
        if cost >= self.best || (self.decide && self.best_set.is_some()) {
            return;
        }
        let inst = self.inst;
        let mut open: Vec<(usize, &Vec<usize>)> = Vec::new();
        for e in &inst.edges {
            if self.covered(e) {
                continue;
            }
            let free = e.iter().filter(|&&v| !self.forbidden[v]).count();
            if free == 0 {
                return;
            }
            open.push((free, e));
        }
        if open.is_empty() {
            self.best = cost;
            self.best_set = Some((0..self.chosen.len()).filter(|&v| self.chosen[v]).collect());
            return;
        }
        open.sort_by_key(|&(free, e)| (free, e.len()));
        // Disjoint open edges each need their own cheapest vertex.
        let mut used = alloc::vec![false; self.chosen.len()];
        let mut bound = 0u64;
        for &(_, e) in &open {
            let allowed = e.iter().filter(|&&v| !self.forbidden[v]);
            if e.iter().any(|&v| used[v]) {
                continue;
            }
            bound += allowed.map(|&v| inst.weights[v]).min().unwrap_or(0);
            e.iter().for_each(|&v| used[v] = true);
        }
        if cost + bound >= self.best {
            return;
        }
        let mut branch: Vec<usize> = open[0].1.iter().copied().filter(|&v| !self.forbidden[v]).collect();
        branch.sort_by_key(|&v| (inst.weights[v], v));
        let mut undo = Vec::new();
        for v in branch {
            self.chosen[v] = true;
            self.dfs(cost + inst.weights[v]);
            self.chosen[v] = false;
            self.forbidden[v] = true;
            undo.push(v);
        }
        for v in undo {
            self.forbidden[v] = false;
        }
    }
}

fn search(inst: &HittingSetInstance, bound: u64, decide: bool) -> Option<(u64, Vec<usize>)> {
    if inst.infeasible {
        return None;
    }
    let n = inst.weights.len();
    let mut s = Search {
        inst,
        chosen: alloc::vec![false; n],
        forbidden: alloc::vec![false; n],
        best: bound,
        best_set: None,
        decide,
    };
    s.dfs(0);
    s.best_set.map(|set| (s.best, set))
}

/// Exact minimum-weight hitting set by branch and bound: branch on the
/// vertices of a smallest open edge, bound by a packing of disjoint edges.
pub fn solve_hitting_set(inst: &HittingSetInstance) -> HittingSolution {
    let total: u64 = inst.weights.iter().sum();
    match search(inst, total.saturating_add(1), false) {
        Some((cost, chosen)) => HittingSolution {
            cost: Cost::int(cost as i64),
            chosen,
        },
        None => HittingSolution {
            cost: Cost::Infinite,
            chosen: Vec::new(),
        },
    }
}

/// Whether some hitting set has weight at most `u`.
pub fn decide_hitting_set(inst: &HittingSetInstance, u: u64) -> bool {
    search(inst, u.saturating_add(1), true).is_some()
}
