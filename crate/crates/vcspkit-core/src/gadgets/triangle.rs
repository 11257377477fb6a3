//! The triangle gadget: a chain of eight weighted atoms over R, S, T braced by
//! seven crisp ones, whose optimal assignments on a triangle-free model make
//! every other chain atom hold. Projections of it give crisp relations
//! tying one pair's R-status to another pair's S- or T-status, and together
//! they express one-in-three on the R-status of pairs.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::strip::{mask_from, Mask, Strip, INF};
use super::{GadgetError, GadgetReport};
use crate::presets;
use crate::query::{enumerate_homomorphisms, RelationalStructure, Signature};
use crate::vcsp::{apply_clone_operator, dual_to_valued, CloneOp, RelRef, TauExpression, ValuedStructure};

/// Optimal value of the gadget on a triangle-free model where it is attained.
pub const GADGET_MINIMUM: u32 = 7;
/// Element names of the designated pair encoding 1 (an R-edge).
pub const ONE_PAIR: (&str, &str) = ("one_a", "one_b");
/// Element names of the designated pair encoding 0 (no R-edge).
pub const ZERO_PAIR: (&str, &str) = ("zero_a", "zero_b");

const NAMES: [&str; 9] = ["a", "b", "c", "d", "e", "f", "g", "h", "i"];
const R: usize = 0;
const S: usize = 1;
const T: usize = 2;
/// Weighted chain atoms `(relation, from, to, weight)`; even indices form
/// one parity class, odd indices the other.
const CHAIN: [(usize, usize, usize, usize); 8] = [
    (R, 0, 1, 1),
    (S, 1, 2, 2),
    (T, 2, 3, 2),
    (R, 3, 4, 2),
    (S, 4, 5, 2),
    (T, 5, 6, 2),
    (R, 6, 7, 2),
    (S, 7, 8, 1),
];
/// Crisp braces `(relation, from, to)`, read through the optimal-tuple operator.
const BRACES: [(usize, usize, usize); 7] = [(T, 8, 6), (S, 7, 5), (R, 6, 4), (T, 5, 3), (S, 4, 2), (R, 3, 1), (T, 2, 0)];

/// Pair positions in the strip: `(a,b)`, `(e,f)`, `(f,g)` and `(h,i)`.
const PAIR_AB: usize = 0;
const PAIR_EF: usize = 4;
const PAIR_FG: usize = 5;
const PAIR_HI: usize = 7;

fn triangle_signature() -> Signature {
    Signature::from_symbols([("R", 2), ("S", 2), ("T", 2)]).expect("fixed signature")
}

/// The gadget over symbols `R, S, T, R*, S*, T*`, the starred ones standing
/// for the optimal tuples of the plain ones. Weights are repeated atoms.
pub fn triangle_gadget_expression() -> TauExpression {
    let mut e = TauExpression::new(NAMES.iter().map(|s| s.to_string()).collect());
    for &(rel, a, b, w) in &CHAIN {
        for _ in 0..w {
            e.push(RelRef::Symbol(rel), alloc::vec![a, b]);
        }
    }
    for &(rel, a, b) in &BRACES {
        e.push(RelRef::Symbol(3 + rel), alloc::vec![a, b]);
    }
    e
}

fn project_rst(model: &RelationalStructure) -> Result<RelationalStructure, GadgetError> {
    let sig = triangle_signature();
    let mut out = RelationalStructure::new(sig.clone(), model.elements().to_vec());
    for r in 0..sig.len() {
        let name = sig.name(r);
        let src = model
            .signature()
            .index_of(name)
            .filter(|&i| model.signature().arity(i) == 2)
            .ok_or_else(|| GadgetError::MissingRelation {
                name: name.to_string(),
                arity: 2,
            })?;
        for t in model.tuples(src) {
            out.add_tuple(r, t.clone())?;
        }
    }
    Ok(out)
}

/// Valued structure of a model: R, S, T cost 0 on their tuples and 1
/// elsewhere, and their crisp optimal-tuple copies.
pub fn triangle_gadget_structure(model: &RelationalStructure) -> Result<ValuedStructure, GadgetError> {
    let b = project_rst(model)?;
    let mut gamma = dual_to_valued(&b, &[]);
    for r in 0..3 {
        let crisp = apply_clone_operator(&CloneOp::Opt, gamma.relation(r))?;
        let name = format!("{}*", b.signature().name(r));
        gamma = gamma.with_relation(&name, crisp)?;
    }
    Ok(gamma)
}

/// Adds an optimal gadget assignment through the pinned variables: fresh
/// elements for the others, the braces, and the chain atoms of the parity
/// class containing `R(a,b)` when that edge is present, the other class
/// otherwise.
fn add_gadget_copy(model: &mut RelationalStructure, pins: &[(usize, usize)], prefix: &str) {
    let mut el = [usize::MAX; 9];
    for &(v, e) in pins {
        el[v] = e;
    }
    for (v, slot) in el.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = model.ensure_element(&format!("{prefix}.{}", NAMES[v]));
        }
    }
    let parity = if model.contains(R, &[el[0], el[1]]) { 0 } else { 1 };
    let held = CHAIN
        .iter()
        .enumerate()
        .filter(|(k, _)| k % 2 == parity)
        .map(|(_, &(r, a, b, _))| (r, a, b))
        .chain(BRACES.iter().copied());
    let facts: Vec<(usize, usize, usize)> = held.collect();
    for (r, a, b) in facts {
        model.add_tuple(r, alloc::vec![el[a], el[b]]).expect("binary fact");
    }
}

/// The witness model: a free amalgam of optimal gadget assignments over two
/// designated pairs, with one triangle-shaped witness per one-in-three
/// pattern. It avoids the triangle query and realises every projection the
/// one-in-three check needs.
pub fn build_witness_model() -> RelationalStructure {
    let mut m = RelationalStructure::new(triangle_signature(), Vec::new());
    let one = (m.ensure_element(ONE_PAIR.0), m.ensure_element(ONE_PAIR.1));
    let zero = (m.ensure_element(ZERO_PAIR.0), m.ensure_element(ZERO_PAIR.1));
    m.add_tuple(R, alloc::vec![one.0, one.1]).expect("binary fact");
    for hot in 0..3 {
        let p: Vec<(usize, usize)> = (0..3).map(|k| if k == hot { one } else { zero }).collect();
        let tag = format!("w{hot}");
        let x = m.ensure_element(&format!("{tag}.x"));
        let y = m.ensure_element(&format!("{tag}.y"));
        let z = m.ensure_element(&format!("{tag}.z"));
        for (k, (r, a, b)) in [(R, x, y), (S, y, z), (T, z, x)].into_iter().enumerate() {
            if k != hot {
                m.add_tuple(r, alloc::vec![a, b]).expect("binary fact");
            }
        }
        // Link pair for the R-to-R relation: S on it iff the first pair is 0.
        let u = m.ensure_element(&format!("{tag}.u"));
        let v = m.ensure_element(&format!("{tag}.v"));
        if hot != 0 {
            m.add_tuple(S, alloc::vec![u, v]).expect("binary fact");
        }
        add_gadget_copy(&mut m, &[(0, p[0].0), (1, p[0].1), (7, u), (8, v)], &format!("{tag}.rs0"));
        add_gadget_copy(&mut m, &[(0, x), (1, y), (4, u), (5, v)], &format!("{tag}.eq"));
        add_gadget_copy(&mut m, &[(0, p[1].0), (1, p[1].1), (7, y), (8, z)], &format!("{tag}.rs"));
        add_gadget_copy(&mut m, &[(0, p[2].0), (1, p[2].1), (5, z), (6, x)], &format!("{tag}.rt"));
    }
    m
}

fn show_pair(m: &RelationalStructure, n: usize, idx: usize) -> String {
    format!("({},{})", m.elements()[idx / n], m.elements()[idx % n])
}

fn show_assignment(m: &RelationalStructure, a: &[usize]) -> String {
    let parts: Vec<String> = a
        .iter()
        .enumerate()
        .map(|(v, &e)| format!("{}={}", NAMES[v], m.elements()[e]))
        .collect();
    parts.join(" ")
}

/// Seven images of the triangle query in the gadget's own structure (braces
/// read as plain atoms) using each atom occurrence at most once.
fn packing_of_seven() -> Option<String> {
    let expr = triangle_gadget_expression();
    let mut canon = RelationalStructure::with_size(triangle_signature(), NAMES.len());
    for atom in expr.atoms() {
        let RelRef::Symbol(s) = atom.rel else { continue };
        canon.add_tuple(s % 3, atom.args.clone()).expect("binary fact");
    }
    let q = presets::triangle_query().canonical_database();
    // Atom occurrences available per fact.
    let mut capacity: Vec<((usize, usize, usize), usize)> = Vec::new();
    for atom in expr.atoms() {
        let RelRef::Symbol(s) = atom.rel else { continue };
        let key = (s % 3, atom.args[0], atom.args[1]);
        match capacity.iter_mut().find(|(k, _)| *k == key) {
            Some((_, c)) => *c += 1,
            None => capacity.push((key, 1)),
        }
    }
    let images: BTreeSet<Vec<usize>> = enumerate_homomorphisms(&q, &canon, None)
        .into_iter()
        .map(|h| {
            let mut used: Vec<usize> = q
                .facts()
                .map(|(r, t)| {
                    let key = (r, h[t[0]], h[t[1]]);
                    capacity.iter().position(|(k, _)| *k == key).expect("image fact")
                })
                .collect();
            used.sort_unstable();
            used
        })
        .collect();
    let images: Vec<Vec<usize>> = images.into_iter().collect();
    let mut left: Vec<usize> = capacity.iter().map(|(_, c)| *c).collect();
    fn search(images: &[Vec<usize>], from: usize, need: usize, left: &mut [usize]) -> bool {
        if need == 0 {
            return true;
        }
        for i in from..images.len() {
            if images[i].iter().all(|&f| left[f] > 0) {
                for &f in &images[i] {
                    left[f] -= 1;
                }
                let ok = search(images, i, need - 1, left);
                for &f in &images[i] {
                    left[f] += 1;
                }
                if ok {
                    return true;
                }
            }
        }
        false
    }
    if search(&images, 0, GADGET_MINIMUM as usize, &mut left) {
        None
    } else {
        Some(format!("only {} distinct triangle images, no packing of seven", images.len()))
    }
}

/// Pairs whose status in `rel` is `want`, as a mask.
fn status_mask(b: &RelationalStructure, rel: usize, want: bool) -> Vec<u32> {
    mask_from(b.size(), |x, y| b.contains(rel, &[x, y]) == want)
}

fn set_mask(n: usize, set: &[bool]) -> Vec<u32> {
    mask_from(n, |x, y| set[x * n + y])
}

struct Checker<'a> {
    model: &'a RelationalStructure,
    strip: Strip,
    n: usize,
    best: u32,
}

impl Checker<'_> {
    /// Pairs at `k` that extend to an optimal assignment under the masks.
    fn optimal_at(&self, k: usize, masks: &[Mask<'_>]) -> Vec<bool> {
        self.strip.profile(k, masks).into_iter().map(|c| c == self.best).collect()
    }

    /// A pinned-pair relation claims `status(first) xor status(second)`
    /// (or equality when `equal`); a counterexample is an optimal assignment
    /// breaking it.
    fn forward(&self, second_rel: usize, second_pair: usize, equal: bool) -> Option<String> {
        for first in [false, true] {
            let bad_second = if equal { !first } else { first };
            let m1 = status_mask(self.model, R, first);
            let m2 = status_mask(self.model, second_rel, bad_second);
            let masks: [Mask<'_>; 2] = [(PAIR_AB, &m1), (second_pair, &m2)];
            if self.strip.minimum(&masks) <= self.best {
                let a = self.strip.argmin(&masks).expect("finite");
                return Some(show_assignment(self.model, &a));
            }
        }
        None
    }

    /// Pairs `(w,z)` with `RS(p, w, z)` for some `p` in the mask.
    fn rs_targets(&self, first: &[u32]) -> Vec<bool> {
        self.optimal_at(PAIR_HI, &[(PAIR_AB, first)])
    }

    /// Pairs `(x,y)` related to some pair in `first` by the R-to-R relation.
    fn rr_sources(&self, first: &[u32]) -> Vec<bool> {
        let link = set_mask(self.n, &self.rs_targets(first));
        self.optimal_at(PAIR_AB, &[(PAIR_EF, &link)])
    }
}

/// Checks the gadget on a model: the lower bound, the optimum, the
/// forward direction of every projection, and one-in-three on the
/// designated pairs.
pub fn verify_triangle_gadget(model: &RelationalStructure) -> Result<GadgetReport, GadgetError> {
    let b = project_rst(model)?;
    let gamma = triangle_gadget_structure(&b)?;
    let expr = triangle_gadget_expression();
    let strip = Strip::new(&expr, &gamma)?;
    let n = strip.domain_size();
    let mut report = GadgetReport::new("triangle");

    let tri = presets::triangle_query();
    let hit = enumerate_homomorphisms(&tri.canonical_database(), &b, Some(1)).into_iter().next();
    report.push(
        "model avoids the triangle query",
        hit.map(|h| format!("triangle on {}", crate::query::element_names(&b, &h).join(","))),
    );
    report.push("gadget packs seven disjoint triangle images", packing_of_seven());
    // The optimal-tuple copy of an empty relation is everything.
    let empty = (0..3).find(|&r| b.tuples(r).is_empty());
    report.push(
        "R, S and T are non-empty",
        empty.map(|r| format!("{} has no tuples", b.signature().name(r))),
    );

    let best = strip.minimum(&[]);
    let best_note = (best != GADGET_MINIMUM).then(|| {
        let shown = if best >= INF { "∞".to_string() } else { best.to_string() };
        match strip.argmin(&[]) {
            Some(a) => format!("minimum {shown} at {}", show_assignment(&b, &a)),
            None => format!("minimum {shown}"),
        }
    });
    report.push("gadget minimum is 7", best_note);
    if best >= INF {
        return Ok(report);
    }
    let ck = Checker {
        model: &b,
        strip,
        n,
        best,
    };

    report.push("R→T relation forces R(a,b) xor T(f,g)", ck.forward(T, PAIR_FG, false));
    report.push("R→S relation forces R(a,b) xor S(h,i)", ck.forward(S, PAIR_HI, false));
    report.push("R=S relation forces R(a,b) iff S(e,f)", ck.forward(S, PAIR_EF, true));
    let mut rr = None;
    for status in [false, true] {
        let m = status_mask(&b, R, status);
        let src = ck.rr_sources(&m);
        if let Some(idx) = (0..n * n).find(|&i| src[i] && b.contains(R, &[i / n, i % n]) == status) {
            rr = Some(format!(
                "{} has R-status {status} and is related to a pair of the same status",
                show_pair(&b, n, idx)
            ));
            break;
        }
    }
    report.push("R→R relation forces R(u,v) xor R(x,y)", rr);

    one_in_three(&ck, &mut report);
    Ok(report)
}

fn one_in_three(ck: &Checker<'_>, report: &mut GadgetReport) {
    let b = ck.model;
    let n = ck.n;
    let index = |name: &str| b.element_index(name);
    let pair = |p: (&str, &str)| Some((index(p.0)?, index(p.1)?));
    let (Some(one), Some(zero)) = (pair(ONE_PAIR), pair(ZERO_PAIR)) else {
        report.push(
            "designated pairs are present",
            Some(format!("need elements {}, {}, {}, {}", ONE_PAIR.0, ONE_PAIR.1, ZERO_PAIR.0, ZERO_PAIR.1)),
        );
        return;
    };
    let statuses_ok = b.contains(R, &[one.0, one.1]) && !b.contains(R, &[zero.0, zero.1]);
    report.push(
        "designated pairs encode 1 and 0",
        (!statuses_ok).then(|| "the one pair must be an R-edge and the zero pair must not".to_string()),
    );
    if !statuses_ok {
        return;
    }

    // Relations from each designated pair, indexed by the other pair.
    let tables = |p: (usize, usize)| {
        let pin = mask_from(n, |x, y| (x, y) == p);
        let rr = ck.rr_sources(&pin);
        let rs = ck.optimal_at(PAIR_HI, &[(PAIR_AB, &pin)]);
        let rt = ck.optimal_at(PAIR_FG, &[(PAIR_AB, &pin)]);
        (rr, rs, rt)
    };
    let t1 = tables(one);
    let t0 = tables(zero);
    let soft = |r: usize, x: usize, y: usize| u32::from(!b.contains(r, &[x, y]));

    let mut values = Vec::new();
    for bits in 0..8u32 {
        let bit = |k: u32| (bits >> (2 - k)) & 1 == 1;
        let pick = |k: u32| if bit(k) { &t1 } else { &t0 };
        let (rr, rs, rt) = (&pick(0).0, &pick(1).1, &pick(2).2);
        let mut best = INF;
        for x in 0..n {
            for y in 0..n {
                if !rr[x * n + y] {
                    continue;
                }
                for z in 0..n {
                    if rs[y * n + z] && rt[z * n + x] {
                        best = best.min(soft(R, x, y) + soft(S, y, z) + soft(T, z, x));
                    }
                }
            }
        }
        values.push(best);
    }
    let low = values.iter().copied().min().unwrap_or(INF);
    report.push(
        "one-in-three composite attains 1",
        (low != 1).then(|| format!("least value on the designated pairs is {low}")),
    );
    for (bits, &v) in values.iter().enumerate() {
        let want = bits.count_ones() == 1;
        let got = v == low && low < INF;
        let label = format!("({},{},{})", bits >> 2, (bits >> 1) & 1, bits & 1);
        report.push(
            &format!("one-in-three on the encoding of {label}"),
            (got != want).then(|| {
                format!(
                    "{label} is {} but should be {}",
                    if got { "optimal" } else { "not optimal" },
                    if want { "optimal" } else { "not optimal" }
                )
            }),
        );
    }
}
