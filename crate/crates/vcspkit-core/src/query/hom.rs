//! Homomorphism search between relational structures.
//!
//! Relations are matched by name; a source relation missing from the target is
//! treated as empty there.

use alloc::vec::Vec;

use super::RelationalStructure;

struct TargetIndex {
    /// Per relation, its tuples.
    tuples: Vec<Vec<Vec<usize>>>,
    /// Per relation and position, tuples (by index) with a given value there.
    by_value: Vec<Vec<Vec<Vec<u32>>>>,
}

impl TargetIndex {
    fn new(dst: &RelationalStructure, src: &RelationalStructure) -> TargetIndex {
        let n = dst.size();
        let mut tuples = Vec::new();
        let mut by_value = Vec::new();
        for r in 0..src.signature().len() {
            let arity = src.signature().arity(r);
            let ts: Vec<Vec<usize>> = match dst.relation_by_name(src.signature().name(r)) {
                Some(set) if set.iter().all(|t| t.len() == arity) => set.iter().cloned().collect(),
                _ => Vec::new(),
            };
            let mut idx = alloc::vec![alloc::vec![Vec::new(); n]; arity];
            for (i, t) in ts.iter().enumerate() {
                for (p, &v) in t.iter().enumerate() {
                    idx[p][v].push(i as u32);
                }
            }
            tuples.push(ts);
            by_value.push(idx);
        }
        TargetIndex { tuples, by_value }
    }

    /// Whether some target tuple agrees with the assigned positions of `fact`.
    fn consistent(&self, rel: usize, fact: &[usize], assign: &[usize]) -> bool {
        let mut best: Option<&Vec<u32>> = None;
        let mut any_assigned = false;
        for (p, &v) in fact.iter().enumerate() {
            let a = assign[v];
            if a != UNSET {
                any_assigned = true;
                let list = &self.by_value[rel][p][a];
                if best.is_none_or(|b| list.len() < b.len()) {
                    best = Some(list);
                }
            }
        }
        if !any_assigned {
            return !self.tuples[rel].is_empty();
        }
        let list = best.expect("some position is assigned");
        list.iter().any(|&i| {
            let t = &self.tuples[rel][i as usize];
            fact.iter()
                .zip(t)
                .all(|(&v, &w)| assign[v] == UNSET || assign[v] == w)
        })
    }
}

const UNSET: usize = usize::MAX;

struct Search<'a> {
    facts: Vec<(usize, &'a Vec<usize>)>,
    /// Facts incident to each source element.
    incident: Vec<Vec<usize>>,
    order: Vec<usize>,
    index: TargetIndex,
    n_dst: usize,
}

impl<'a> Search<'a> {
    fn new(src: &'a RelationalStructure, dst: &RelationalStructure) -> Search<'a> {
        let facts: Vec<(usize, &Vec<usize>)> = src.facts().collect();
        let mut incident = alloc::vec![Vec::new(); src.size()];
        for (i, (_, t)) in facts.iter().enumerate() {
            for &e in t.iter() {
                if incident[e].last() != Some(&i) {
                    incident[e].push(i);
                }
            }
        }
        let mut order: Vec<usize> = (0..src.size()).collect();
        order.sort_by_key(|&e| core::cmp::Reverse(incident[e].len()));
        Search {
            facts,
            incident,
            order,
            index: TargetIndex::new(dst, src),
            n_dst: dst.size(),
        }
    }

    fn run(&self, limit: Option<usize>, out: &mut Vec<Vec<usize>>) {
        if self.facts.iter().any(|(r, _)| self.index.tuples[*r].is_empty()) {
            return;
        }
        let mut assign = alloc::vec![UNSET; self.incident.len()];
        self.dfs(0, &mut assign, limit, out);
    }

    /// Returns true once the limit is reached.
    fn dfs(&self, depth: usize, assign: &mut [usize], limit: Option<usize>, out: &mut Vec<Vec<usize>>) -> bool {
        if depth == self.order.len() {
            out.push(assign.to_vec());
            return limit.is_some_and(|l| out.len() >= l);
        }
        let e = self.order[depth];
        for v in 0..self.n_dst {
            assign[e] = v;
            let ok = self.incident[e].iter().all(|&f| {
                let (r, t) = self.facts[f];
                self.index.consistent(r, t, assign)
            });
            if ok && self.dfs(depth + 1, assign, limit, out) {
                assign[e] = UNSET;
                return true;
            }
        }
        assign[e] = UNSET;
        false
    }
}

/// All homomorphisms `src → dst` as element maps, sorted lexicographically.
/// With a limit, the first `limit` maps found are returned (sorted).
pub fn enumerate_homomorphisms(
    src: &RelationalStructure,
    dst: &RelationalStructure,
    limit: Option<usize>,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if limit == Some(0) {
        return out;
    }
    Search::new(src, dst).run(limit, &mut out);
    out.sort();
    out
}

pub fn find_homomorphism(src: &RelationalStructure, dst: &RelationalStructure) -> Option<Vec<usize>> {
    enumerate_homomorphisms(src, dst, Some(1)).pop()
}

pub fn has_homomorphism(src: &RelationalStructure, dst: &RelationalStructure) -> bool {
    find_homomorphism(src, dst).is_some()
}

/// A minimum-size retract, found by trying induced substructures by increasing
/// size. Element names are kept.
pub fn core_of(s: &RelationalStructure) -> RelationalStructure {
    let n = s.size();
    for k in 1..n {
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let sub = s.induced(&subset);
            if has_homomorphism(s, &sub) {
                return sub;
            }
            if !next_subset(&mut subset, n) {
                break;
            }
        }
    }
    s.clone()
}

/// Advances a sorted k-subset of `0..n` to the next one in lexicographic order.
pub(crate) fn next_subset(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::Signature;

    fn sig() -> Signature {
        Signature::from_symbols([("R", 2)]).unwrap()
    }

    fn edges(n: usize, es: &[(usize, usize)]) -> RelationalStructure {
        let mut s = RelationalStructure::with_size(sig(), n);
        for &(a, b) in es {
            s.add_tuple(0, alloc::vec![a, b]).unwrap();
        }
        s
    }

    /// Exhaustive check of all maps, used as an independent oracle.
    fn brute(src: &RelationalStructure, dst: &RelationalStructure) -> Vec<Vec<usize>> {
        let n = src.size();
        let m = dst.size();
        let mut out = Vec::new();
        let total = m.pow(n as u32);
        for code in 0..total {
            let mut map = alloc::vec![0; n];
            let mut c = code;
            for i in (0..n).rev() {
                map[i] = c % m;
                c /= m;
            }
            if src
                .facts()
                .all(|(r, t)| dst.contains(r, &t.iter().map(|&e| map[e]).collect::<Vec<_>>()))
            {
                out.push(map);
            }
        }
        out
    }

    #[test]
    fn single_edge_into_two_loop_structure() {
        let b = edges(2, &[(0, 1), (1, 1)]);
        let a = edges(2, &[(0, 1)]);
        let homs = enumerate_homomorphisms(&a, &b, None);
        assert_eq!(homs, brute(&a, &b));
        assert_eq!(homs.len(), 2);
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        let cases = [
            (edges(3, &[(0, 1), (1, 2)]), edges(3, &[(0, 1), (1, 2), (2, 0)])),
            (edges(3, &[(0, 1), (1, 2), (2, 0)]), edges(2, &[(0, 1), (1, 0)])),
            (edges(3, &[(0, 0)]), edges(2, &[(1, 1), (0, 1)])),
            (edges(2, &[]), edges(3, &[])),
        ];
        for (a, b) in &cases {
            assert_eq!(enumerate_homomorphisms(a, b, None), brute(a, b));
        }
    }

    #[test]
    fn identity_is_a_homomorphism() {
        let s = edges(4, &[(0, 1), (1, 2), (2, 3), (3, 1)]);
        assert!(enumerate_homomorphisms(&s, &s, None).contains(&alloc::vec![0, 1, 2, 3]));
    }

    #[test]
    fn limit_truncates() {
        let a = edges(2, &[]);
        let b = edges(3, &[]);
        assert_eq!(enumerate_homomorphisms(&a, &b, Some(4)).len(), 4);
    }

    #[test]
    fn core_of_two_disjoint_edges_is_one_edge() {
        let s = edges(4, &[(0, 1), (2, 3)]);
        let c = core_of(&s);
        assert_eq!(c.size(), 2);
        assert_eq!(c.fact_count(), 1);
    }

    #[test]
    fn directed_path_is_its_own_core() {
        let s = edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(core_of(&s), s);
        let one = edges(1, &[]);
        assert_eq!(core_of(&one), one);
    }

    #[test]
    fn subsets_advance_lexicographically() {
        let mut s = alloc::vec![0, 1];
        let mut all = alloc::vec![s.clone()];
        while next_subset(&mut s, 4) {
            all.push(s.clone());
        }
        assert_eq!(all.len(), 6);
        assert_eq!(all[1], [0, 2]);
        assert_eq!(all[5], [2, 3]);
    }
}
