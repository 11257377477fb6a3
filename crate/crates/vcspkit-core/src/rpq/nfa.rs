use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::RpqExpr;

/// A transition label: a relation followed forwards or backwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub rel: usize,
    pub inverse: bool,
}

/// An automaton without ε-moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    initial: Vec<usize>,
    finals: Vec<bool>,
    transitions: Vec<Vec<(Label, usize)>>,
}

struct Thompson {
    eps: Vec<Vec<usize>>,
    moves: Vec<Vec<(Label, usize)>>,
}

impl Thompson {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.moves.push(Vec::new());
        self.eps.len() - 1
    }

    /// Fragment with one entry and one exit.
    fn build(&mut self, e: &RpqExpr) -> (usize, usize) {
        let (s, t) = (self.state(), self.state());
        match e {
            RpqExpr::Empty => {}
            RpqExpr::Epsilon => self.eps[s].push(t),
            RpqExpr::Symbol { rel, inverse } => self.moves[s].push((
                Label {
                    rel: *rel,
                    inverse: *inverse,
                },
                t,
            )),
            RpqExpr::Union(a, b) => {
                for sub in [a, b] {
                    let (i, o) = self.build(sub);
                    self.eps[s].push(i);
                    self.eps[o].push(t);
                }
            }
            RpqExpr::Concat(a, b) => {
                let (i1, o1) = self.build(a);
                let (i2, o2) = self.build(b);
                self.eps[s].push(i1);
                self.eps[o1].push(i2);
                self.eps[o2].push(t);
            }
            RpqExpr::Star(a) => {
                let (i, o) = self.build(a);
                self.eps[s].push(i);
                self.eps[s].push(t);
                self.eps[o].push(i);
                self.eps[o].push(t);
            }
        }
        (s, t)
    }

    fn closure(&self, from: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([from]);
        let mut stack = alloc::vec![from];
        while let Some(q) = stack.pop() {
            for &r in &self.eps[q] {
                if seen.insert(r) {
                    stack.push(r);
                }
            }
        }
        seen
    }
}

impl Nfa {
    /// Thompson construction followed by ε-elimination.
    pub fn from_expr(e: &RpqExpr) -> Nfa {
        let mut th = Thompson {
            eps: Vec::new(),
            moves: Vec::new(),
        };
        let (start, accept) = th.build(e);
        let n = th.eps.len();
        let mut finals = alloc::vec![false; n];
        let mut transitions = alloc::vec![Vec::new(); n];
        for q in 0..n {
            let cl = th.closure(q);
            finals[q] = cl.contains(&accept);
            let mut out: BTreeSet<(Label, usize)> = BTreeSet::new();
            for &p in &cl {
                out.extend(th.moves[p].iter().copied());
            }
            transitions[q] = out.into_iter().collect();
        }
        Nfa {
            initial: alloc::vec![start],
            finals,
            transitions,
        }
    }

    pub fn num_states(&self) -> usize {
        self.finals.len()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn transitions_from(&self, q: usize) -> &[(Label, usize)] {
        &self.transitions[q]
    }

    /// Whether the automaton accepts the word.
    pub fn accepts(&self, word: &[Label]) -> bool {
        let mut cur: BTreeSet<usize> = self.initial.iter().copied().collect();
        for l in word {
            cur = cur
                .iter()
                .flat_map(|&q| self.transitions[q].iter().filter(|(m, _)| m == l).map(|&(_, t)| t))
                .collect();
        }
        cur.iter().any(|&q| self.finals[q])
    }
}
