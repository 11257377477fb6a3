//! Two structures on the square of a model of the loop-query axioms that
//! together witness a binary fractional polymorphism: the first takes S on a
//! pair when either coordinate has it, the second takes a loop when either
//! coordinate has one.
//!
//! A model meets the axioms when it avoids `S(x), R(x,y), R(y,x), R(y,y)`,
//! no S-element has a loop, every pair of distinct elements is joined in
//! at least one direction, and every such pair is joined both ways unless
//! one end has S and the other a loop.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Claim, GadgetError, GadgetReport};
use crate::presets;
use crate::query::{enumerate_homomorphisms, RelationalStructure, Signature};

const R: usize = 0;
const S: usize = 1;

fn loop_signature() -> Signature {
    presets::loop_query().signature().clone()
}

fn project(model: &RelationalStructure) -> Result<RelationalStructure, GadgetError> {
    let sig = loop_signature();
    let mut out = RelationalStructure::new(sig.clone(), model.elements().to_vec());
    for r in 0..sig.len() {
        let (name, arity) = (sig.name(r), sig.arity(r));
        let src = model
            .signature()
            .index_of(name)
            .filter(|&i| model.signature().arity(i) == arity)
            .ok_or_else(|| GadgetError::MissingRelation {
                name: name.to_string(),
                arity,
            })?;
        for t in model.tuples(src) {
            out.add_tuple(r, t.clone())?;
        }
    }
    Ok(out)
}

fn has_loop(m: &RelationalStructure, x: usize) -> bool {
    m.contains(R, &[x, x])
}

fn has_s(m: &RelationalStructure, x: usize) -> bool {
    m.contains(S, &[x])
}

fn edge(m: &RelationalStructure, x: usize, y: usize) -> bool {
    m.contains(R, &[x, y])
}

/// Whether distinct `x, y` meet the two-way axiom.
fn joined_enough(m: &RelationalStructure, x: usize, y: usize) -> bool {
    (edge(m, x, y) && edge(m, y, x)) || (has_s(m, x) && has_loop(m, y)) || (has_loop(m, x) && has_s(m, y))
}

fn name(m: &RelationalStructure, x: usize) -> &str {
    &m.elements()[x]
}

fn avoids_query(m: &RelationalStructure) -> Option<String> {
    let q = presets::loop_query().canonical_database();
    enumerate_homomorphisms(&q, m, Some(1))
        .into_iter()
        .next()
        .map(|h| format!("query holds with x={}, y={}", name(m, h[0]), name(m, h[1])))
}

fn s_without_loop(m: &RelationalStructure) -> Option<String> {
    (0..m.size())
        .find(|&x| has_s(m, x) && has_loop(m, x))
        .map(|x| format!("{} has S and a loop", name(m, x)))
}

fn total(m: &RelationalStructure) -> Option<String> {
    let n = m.size();
    (0..n)
        .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
        .find(|&(x, y)| !edge(m, x, y) && !edge(m, y, x))
        .map(|(x, y)| format!("{} and {} are not joined", name(m, x), name(m, y)))
}

fn two_way(m: &RelationalStructure) -> Option<String> {
    let n = m.size();
    (0..n)
        .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
        .find(|&(x, y)| !joined_enough(m, x, y))
        .map(|(x, y)| format!("{} and {} are joined one way only", name(m, x), name(m, y)))
}

/// The four axioms, each with a witness when it fails.
pub fn check_loop_preconditions(model: &RelationalStructure) -> Result<Vec<Claim>, GadgetError> {
    let m = project(model)?;
    Ok(alloc::vec![
        Claim::check("model avoids the loop query", avoids_query(&m)),
        Claim::check("no S-element has a loop", s_without_loop(&m)),
        Claim::check("distinct elements are joined", total(&m)),
        Claim::check("one-way joins go between S and a loop", two_way(&m)),
    ])
}

/// A five-element model: S on `s1, s2`, loops on `l1, l2`, a plain element
/// `n`, the S-to-loop pairs joined one way in both orientations, and every
/// other pair of distinct elements joined both ways.
pub fn loop_reference_model() -> RelationalStructure {
    let names = ["s1", "s2", "l1", "l2", "n"];
    let mut m = RelationalStructure::new(loop_signature(), names.iter().map(|s| s.to_string()).collect());
    let one_way = [("s1", "l1"), ("s1", "l2"), ("l1", "s2"), ("l2", "s2")];
    for a in names {
        for b in names {
            if a == b || one_way.contains(&(b, a)) {
                continue;
            }
            m.add_named("R", &[a, b]).expect("preset fact");
        }
    }
    for s in ["s1", "s2"] {
        m.add_named("S", &[s]).expect("preset fact");
    }
    for l in ["l1", "l2"] {
        m.add_named("R", &[l, l]).expect("preset fact");
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopProduct {
    /// The model the squares are built over.
    pub base: RelationalStructure,
    /// S on a pair when either coordinate has S.
    pub s_max: RelationalStructure,
    /// A loop on a pair when either coordinate has one.
    pub loop_max: RelationalStructure,
    /// Edges added to make the squares total, `(square, from, to)` with
    /// square 0 for `s_max` and 1 for `loop_max`.
    pub totality_edges: Vec<(usize, usize, usize)>,
}

impl LoopProduct {
    pub fn pair(&self, x: usize, y: usize) -> usize {
        x * self.base.size() + y
    }
}

/// Builds both squares. Pairs failing the two-way axiom are joined both
/// ways, scanning pairs in lexicographic order, and then the four one-way
/// patterns add an edge to the first square and its reverse to the second.
pub fn build_loop_product(model: &RelationalStructure) -> Result<LoopProduct, GadgetError> {
    if let Some(c) = check_loop_preconditions(model)?.into_iter().find(|c| !c.holds()) {
        return Err(GadgetError::Precondition(format!(
            "{}: {}",
            c.name,
            c.counterexample.unwrap_or_default()
        )));
    }
    let f = project(model)?;
    let n = f.size();
    let mut elements = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            elements.push(format!("({},{})", name(&f, x), name(&f, y)));
        }
    }
    let mut left = RelationalStructure::new(loop_signature(), elements.clone());
    let mut right = RelationalStructure::new(loop_signature(), elements);
    let p = |x: usize, y: usize| x * n + y;
    let coords = |q: usize| (q / n, q % n);

    for q1 in 0..n * n {
        let (x1, y1) = coords(q1);
        for q2 in 0..n * n {
            let (x2, y2) = coords(q2);
            if edge(&f, x1, x2) && edge(&f, y1, y2) {
                left.add_tuple(R, alloc::vec![q1, q2])?;
                right.add_tuple(R, alloc::vec![q1, q2])?;
            }
        }
        if has_s(&f, x1) && has_s(&f, y1) {
            right.add_tuple(S, alloc::vec![q1])?;
        }
        if has_s(&f, x1) || has_s(&f, y1) {
            left.add_tuple(S, alloc::vec![q1])?;
        }
        if has_loop(&f, x1) || has_loop(&f, y1) {
            right.add_tuple(R, alloc::vec![q1, q1])?;
        }
    }
    for sq in [&mut left, &mut right] {
        for q1 in 0..n * n {
            for q2 in q1 + 1..n * n {
                if !joined_enough(sq, q1, q2) {
                    sq.add_tuple(R, alloc::vec![q1, q2])?;
                    sq.add_tuple(R, alloc::vec![q2, q1])?;
                }
            }
        }
    }
    // One-way patterns: S, then a loop reached one way, on one coordinate
    // mirrored on the other; or a loop reaching S while the other
    // coordinate stays on a loop.
    let pattern_a = |x1: usize, x2: usize, y1: usize, y2: usize| {
        has_s(&f, x1)
            && edge(&f, x1, x2)
            && has_loop(&f, x2)
            && has_loop(&f, y2)
            && edge(&f, y2, y1)
            && has_s(&f, y1)
    };
    let pattern_b = |x1: usize, x2: usize, y1: usize, y2: usize| {
        has_loop(&f, x1) && edge(&f, x1, x2) && has_s(&f, x2) && y1 == y2 && edge(&f, y1, y2)
    };
    for x1 in 0..n {
        for y1 in 0..n {
            for x2 in 0..n {
                for y2 in 0..n {
                    if pattern_a(x1, x2, y1, y2)
                        || pattern_b(x1, x2, y1, y2)
                        || pattern_a(y1, y2, x1, x2)
                        || pattern_b(y1, y2, x1, x2)
                    {
                        left.add_tuple(R, alloc::vec![p(x1, y1), p(x2, y2)])?;
                        right.add_tuple(R, alloc::vec![p(x2, y2), p(x1, y1)])?;
                    }
                }
            }
        }
    }
    // The two-way axiom can hold through S and a loop with no edge at all,
    // so a pair may still be unjoined. Join it in the direction whose
    // coordinates cost less in the model (the earlier pair first on ties).
    // A single edge between unjoined elements cannot complete the query.
    let mut totality_edges = Vec::new();
    for (k, sq) in [&mut left, &mut right].into_iter().enumerate() {
        for q1 in 0..n * n {
            for q2 in q1 + 1..n * n {
                if edge(sq, q1, q2) || edge(sq, q2, q1) {
                    continue;
                }
                let cost = |a: usize, b: usize| {
                    let ((x1, y1), (x2, y2)) = (coords(a), coords(b));
                    u32::from(!edge(&f, x1, x2)) + u32::from(!edge(&f, y1, y2))
                };
                let (a, b) = if cost(q2, q1) < cost(q1, q2) { (q2, q1) } else { (q1, q2) };
                sq.add_tuple(R, alloc::vec![a, b])?;
                totality_edges.push((k, a, b));
            }
        }
    }
    Ok(LoopProduct {
        base: f,
        s_max: left,
        loop_max: right,
        totality_edges,
    })
}

/// Checks the axioms, then that both squares satisfy the first three axioms
/// and split the costs of S exactly and of R within the average.
pub fn verify_loop_product(model: &RelationalStructure) -> Result<GadgetReport, GadgetError> {
    let mut report = GadgetReport::new("loop-product");
    report.claims = check_loop_preconditions(model)?;
    if !report.passed() {
        return Ok(report);
    }
    let prod = build_loop_product(model)?;
    let (f, m, nn) = (&prod.base, &prod.s_max, &prod.loop_max);
    for (label, sq) in [("S-max square", m), ("loop-max square", nn)] {
        report.push(&format!("{label} avoids the loop query"), avoids_query(sq));
        report.push(&format!("{label} joins distinct elements"), total(sq));
        report.push(&format!("{label} keeps S-elements loop-free"), s_without_loop(sq));
        report.push(&format!("{label} meets the two-way axiom"), two_way(sq));
    }

    let n = f.size();
    let miss = |holds: bool| u32::from(!holds);
    let s_split = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .find(|&(x, y)| {
            let q = prod.pair(x, y);
            miss(has_s(m, q)) + miss(has_s(nn, q)) != miss(has_s(f, x)) + miss(has_s(f, y))
        })
        .map(|(x, y)| format!("S costs differ at {}", m.elements()[prod.pair(x, y)]));
    report.push("S costs of the squares sum to those of the coordinates", s_split);

    let mut r_bound = None;
    let mut diagonal = None;
    'outer: for q1 in 0..n * n {
        for q2 in 0..n * n {
            let (x1, y1) = (q1 / n, q1 % n);
            let (x2, y2) = (q2 / n, q2 % n);
            let lhs = miss(edge(m, q1, q2)) + miss(edge(nn, q1, q2));
            let rhs = miss(edge(f, x1, x2)) + miss(edge(f, y1, y2));
            let shown = || format!("R({},{}): squares cost {lhs}, coordinates {rhs}", m.elements()[q1], m.elements()[q2]);
            if lhs > rhs && r_bound.is_none() {
                r_bound = Some(shown());
            }
            if q1 == q2 && lhs != rhs && diagonal.is_none() {
                diagonal = Some(shown());
            }
            if r_bound.is_some() && diagonal.is_some() {
                break 'outer;
            }
        }
    }
    report.push("R costs of the squares are within those of the coordinates", r_bound);
    report.push("R costs on loops are split exactly", diagonal);
    Ok(report)
}

/// Every model on 1..=`max_size` elements meeting the axioms.
pub fn loop_models(max_size: usize) -> Vec<RelationalStructure> {
    let mut out = Vec::new();
    for n in 1..=max_size {
        for s_bits in 0u32..(1 << n) {
            for r_bits in 0u64..(1u64 << (n * n)) {
                let mut m = RelationalStructure::with_size(loop_signature(), n);
                for x in 0..n {
                    if s_bits >> x & 1 == 1 {
                        m.add_tuple(S, alloc::vec![x]).expect("unary fact");
                    }
                    for y in 0..n {
                        if r_bits >> (x * n + y) & 1 == 1 {
                            m.add_tuple(R, alloc::vec![x, y]).expect("binary fact");
                        }
                    }
                }
                if s_without_loop(&m).is_none() && total(&m).is_none() && two_way(&m).is_none() && avoids_query(&m).is_none()
                {
                    out.push(m);
                }
            }
        }
    }
    out
}
