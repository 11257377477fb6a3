use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::{Label, Nfa, Rpq, RpqError};
use crate::cost::Cost;
use crate::resilience::{solve_hitting_set, BagDatabase, HittingSetInstance, RemovedFact};

/// Per element, the steps `(next element, fact)` leaving it.
type Adjacency = Vec<Vec<(usize, usize)>>;

/// The database as labelled steps between elements, each step tagged with
/// the stored tuple it uses.
pub(crate) struct PathGraph {
    /// `(relation, tuple)` in the database's signature, and removability.
    facts: Vec<(usize, Vec<usize>, bool)>,
    /// Per query symbol and direction, per element: `(next element, fact)`.
    steps: Vec<[Adjacency; 2]>,
}

impl PathGraph {
    pub(crate) fn new(db: &BagDatabase, q: &Rpq) -> Result<PathGraph, RpqError> {
        let n = db.size();
        let mut facts = Vec::new();
        let mut steps = Vec::new();
        for k in 0..q.signature().len() {
            let name = q.signature().name(k);
            let mut fwd = alloc::vec![Vec::new(); n];
            let mut bwd = alloc::vec![Vec::new(); n];
            if let Some(r) = db.signature().index_of(name) {
                if db.signature().arity(r) != 2 {
                    return Err(RpqError::DatabaseArity(name.into()));
                }
                for t in db.tuples(r).keys() {
                    let id = facts.len();
                    facts.push((r, t.clone(), !db.is_exogenous(r, t)));
                    fwd[t[0]].push((t[1], id));
                    bwd[t[1]].push((t[0], id));
                }
            }
            steps.push([fwd, bwd]);
        }
        Ok(PathGraph { facts, steps })
    }

    pub(crate) fn steps(&self, from: usize, label: Label) -> &[(usize, usize)] {
        &self.steps[label.rel][usize::from(label.inverse)][from]
    }

    fn size(&self) -> usize {
        self.steps.first().map_or(0, |s| s[0].len())
    }
}

/// A matching path using the fewest removable tuples, avoiding the removed
/// ones, as the removable facts it uses; `None` when the query is false.
fn witness(graph: &PathGraph, nfa: &Nfa, n: usize, removed: &[bool]) -> Option<Vec<usize>> {
    let s = nfa.num_states();
    let mut dist = alloc::vec![usize::MAX; n * s];
    let mut parent: Vec<Option<(usize, usize)>> = alloc::vec![None; n * s];
    let mut deque = VecDeque::new();
    for a in 0..n {
        for &st in nfa.initial() {
            dist[a * s + st] = 0;
            deque.push_back(a * s + st);
        }
    }
    let mut done = alloc::vec![false; n * s];
    while let Some(node) = deque.pop_front() {
        if done[node] {
            continue;
        }
        done[node] = true;
        let (e, st) = (node / s, node % s);
        if nfa.is_final(st) {
            let mut used = Vec::new();
            let mut cur = node;
            while let Some((prev, fact)) = parent[cur] {
                if graph.facts[fact].2 {
                    used.push(fact);
                }
                cur = prev;
            }
            used.sort_unstable();
            used.dedup();
            return Some(used);
        }
        for &(label, to) in nfa.transitions_from(st) {
            for &(next, fact) in graph.steps(e, label) {
                if removed[fact] {
                    continue;
                }
                let w = usize::from(graph.facts[fact].2);
                let idx = next * s + to;
                if dist[node] + w < dist[idx] {
                    dist[idx] = dist[node] + w;
                    parent[idx] = Some((node, fact));
                    if w == 0 {
                        deque.push_front(idx);
                    } else {
                        deque.push_back(idx);
                    }
                }
            }
        }
    }
    None
}

pub(crate) fn shortest_witness(db: &BagDatabase, q: &Rpq, removed: &[bool]) -> Result<Option<Vec<usize>>, RpqError> {
    let graph = PathGraph::new(db, q)?;
    let mut mask = removed.to_vec();
    mask.resize(graph.facts.len(), false);
    Ok(witness(&graph, &q.nfa(), db.size(), &mask))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RpqResilience {
    /// Minimum removed weight, ∞ when some matching path is exogenous.
    pub value: Cost,
    /// In the database's signature, sorted; empty when the value is ∞.
    pub removed: Vec<RemovedFact>,
    /// Hitting-set solves performed.
    pub rounds: usize,
}

/// Exact resilience by lazy constraint generation: solve a weighted hitting
/// set over the paths found so far, delete its choice, and look for a path
/// that survives. Each round adds a path the current choice misses, so the
/// loop ends within the number of distinct paths' tuple sets, and the last
/// optimum is exact because it already falsifies the query.
pub fn rpq_resilience(db: &BagDatabase, q: &Rpq) -> Result<RpqResilience, RpqError> {
    let graph = PathGraph::new(db, q)?;
    let nfa = q.nfa();
    let n = graph.size().max(db.size());
    let mut vertex_of = alloc::vec![usize::MAX; graph.facts.len()];
    let mut vertices = Vec::new();
    let mut weights = Vec::new();
    for (id, (r, t, endo)) in graph.facts.iter().enumerate() {
        if *endo {
            vertex_of[id] = vertices.len();
            vertices.push((*r, t.clone()));
            weights.push(db.multiplicity(*r, t));
        }
    }
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let inst = HittingSetInstance::new(vertices.clone(), weights.clone(), edges.clone(), false);
        let sol = solve_hitting_set(&inst);
        let mut removed = alloc::vec![false; graph.facts.len()];
        for &v in &sol.chosen {
            let id = vertex_of.iter().position(|&x| x == v).expect("vertex of a fact");
            removed[id] = true;
        }
        match witness(&graph, &nfa, n, &removed) {
            None => {
                let mut out: Vec<RemovedFact> = sol
                    .chosen
                    .iter()
                    .map(|&v| RemovedFact {
                        rel: vertices[v].0,
                        tuple: vertices[v].1.clone(),
                        mult: weights[v],
                    })
                    .collect();
                out.sort();
                return Ok(RpqResilience {
                    value: sol.cost,
                    removed: out,
                    rounds,
                });
            }
            Some(path) if path.is_empty() => {
                return Ok(RpqResilience {
                    value: Cost::Infinite,
                    removed: Vec::new(),
                    rounds,
                })
            }
            Some(path) => edges.push(path.iter().map(|&id| vertex_of[id]).collect()),
        }
    }
}
