//! Orbit types of m-tuples for queries whose disjuncts have complete Gaifman
//! graphs. The μ-free structures then form a free amalgamation class, so the
//! orbit of a tuple in the generic dual is its equality pattern together with
//! the μ-free structure induced on its entries. The finite type structure over
//! these orbits and the instance reduction onto it live here.

mod reduce;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cost::Cost;
use crate::query::{analyze, QueryError, RelationalStructure, Signature, UnionQuery};
use crate::vcsp::{ValuedRelation, ValuedStructure, VcspError};

pub use reduce::{
    decide_type_reduction, evaluate_type_assignment, reduce_to_type_instance, solve_type_reduction, solve_type_reduction_dense,
    TypeReduction, TypeSolution, DEFAULT_VARIABLE_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrbitError {
    #[error("disjunct {0} does not have a complete Gaifman graph")]
    NotGaifmanComplete(usize),
    #[error("m = {m} is below the largest arity {arity}")]
    TupleTooShort { m: usize, arity: usize },
    #[error("{bits} candidate fact slots per partition exceed the limit of {limit}")]
    TooManyCandidates { bits: usize, limit: usize },
    #[error("{needed} exceeds the cap of {cap}")]
    CapExceeded { needed: u128, cap: usize },
    #[error("atom over `{0}` is not supported by the type reduction")]
    UnsupportedAtom(String),
    #[error("the reduced instance and the type structure use different signatures")]
    SignatureMismatch,
    #[error("the type assignment failed exact re-evaluation")]
    Unverified,
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Vcsp(#[from] VcspError),
}

/// Fact slots per partition above which dense enumeration is refused.
pub const MAX_TYPE_BITS: usize = 22;
/// Largest number of table entries over all compatibility relations of a dense
/// type structure.
pub const DENSE_ENTRY_CAP: usize = 4_000_000;

/// The orbit of an m-tuple: which coordinates are equal, and which facts hold
/// among the distinct entries (numbered by first occurrence).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrbitType {
    partition: Vec<usize>,
    facts: Vec<(usize, Vec<usize>)>,
}

impl OrbitType {
    /// `partition` must be a restricted growth string; facts are sorted.
    pub fn new(partition: Vec<usize>, mut facts: Vec<(usize, Vec<usize>)>) -> OrbitType {
        debug_assert!(is_restricted_growth(&partition));
        facts.sort();
        facts.dedup();
        OrbitType { partition, facts }
    }

    /// The orbit of `tuple` in `s`.
    pub fn of_tuple(s: &RelationalStructure, tuple: &[usize]) -> OrbitType {
        let mut reps: Vec<usize> = Vec::new();
        let partition = tuple
            .iter()
            .map(|&e| match reps.iter().position(|&r| r == e) {
                Some(b) => b,
                None => {
                    reps.push(e);
                    reps.len() - 1
                }
            })
            .collect();
        let mut facts = Vec::new();
        for (rel, t) in s.facts() {
            let mapped: Option<Vec<usize>> = t.iter().map(|e| reps.iter().position(|r| r == e)).collect();
            if let Some(m) = mapped {
                facts.push((rel, m));
            }
        }
        OrbitType::new(partition, facts)
    }

    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partition.is_empty()
    }

    pub fn blocks(&self) -> usize {
        self.partition.iter().max().map_or(0, |b| b + 1)
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    /// Facts over block indices.
    pub fn facts(&self) -> &[(usize, Vec<usize>)] {
        &self.facts
    }

    pub fn holds(&self, rel: usize, blocks: &[usize]) -> bool {
        self.facts
            .binary_search_by(|(r, t)| (*r, t.as_slice()).cmp(&(rel, blocks)))
            .is_ok()
    }

    /// Whether `rel` holds on the coordinates `0..k` of the tuple.
    pub fn holds_on_prefix(&self, rel: usize, k: usize) -> bool {
        self.holds(rel, &self.partition[..k])
    }

    /// The orbit of the sub-tuple at `coords` (0-based positions).
    pub fn project(&self, coords: &[usize]) -> OrbitType {
        let mut old: Vec<usize> = Vec::new();
        let partition = coords
            .iter()
            .map(|&c| {
                let b = self.partition[c];
                match old.iter().position(|&o| o == b) {
                    Some(i) => i,
                    None => {
                        old.push(b);
                        old.len() - 1
                    }
                }
            })
            .collect();
        let facts = self
            .facts
            .iter()
            .filter_map(|(rel, t)| {
                let mapped: Option<Vec<usize>> = t.iter().map(|b| old.iter().position(|o| o == b)).collect();
                mapped.map(|m| (*rel, m))
            })
            .collect();
        OrbitType::new(partition, facts)
    }

    /// The structure on the blocks.
    pub fn quotient(&self, signature: &Signature) -> RelationalStructure {
        let mut s = RelationalStructure::new(signature.clone(), (0..self.blocks()).map(|b| format!("b{b}")).collect());
        for (rel, t) in &self.facts {
            s.add_tuple(*rel, t.clone()).expect("facts fit the signature");
        }
        s
    }
}

impl fmt::Display for OrbitType {
    /// Like `[0,1] R(0,1)`: the partition, then the facts over blocks.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.partition.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")?;
        for (rel, t) in &self.facts {
            write!(f, " {rel}(")?;
            for (i, b) in t.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{b}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn is_restricted_growth(p: &[usize]) -> bool {
    let mut next = 0;
    p.iter().all(|&b| {
        if b > next {
            return false;
        }
        if b == next {
            next += 1;
        }
        true
    })
}

/// All restricted growth strings of length `m`, in lexicographic order.
pub fn partitions(m: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, m: usize, next: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for b in 0..=next {
            cur.push(b);
            go(cur, m, next.max(b + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), m, 0, &mut out);
    out
}

fn check_gaifman(mu: &UnionQuery) -> Result<(), OrbitError> {
    match mu.disjuncts().iter().position(|d| !analyze(d).gaifman_complete) {
        Some(i) => Err(OrbitError::NotGaifmanComplete(i)),
        None => Ok(()),
    }
}

fn check_query(mu: &UnionQuery, m: usize) -> Result<(), OrbitError> {
    check_gaifman(mu)?;
    let arity = mu.signature().max_arity();
    if m < arity.max(1) {
        return Err(OrbitError::TupleTooShort { m, arity });
    }
    Ok(())
}

/// The tuple length that makes the type reduction exact: at least one more
/// than the largest arity, at least the variable count of every disjunct,
/// and at least 3.
pub fn sufficient_m(mu: &UnionQuery) -> usize {
    let vars = mu.disjuncts().iter().map(|d| d.num_vars()).max().unwrap_or(0);
    (mu.signature().max_arity() + 1).max(vars).max(3)
}

/// The default tuple length: the largest arity, and at least 2.
pub fn default_m(mu: &UnionQuery) -> usize {
    mu.signature().max_arity().max(2)
}

/// Every orbit of m-tuples: each partition of the coordinates with each
/// μ-free structure on its blocks, ordered by partition and then by the
/// bitmask of facts over the lexicographically ordered slots.
pub fn enumerate_orbit_types(mu: &UnionQuery, m: usize) -> Result<Vec<OrbitType>, OrbitError> {
    check_gaifman(mu)?;
    let sig = mu.signature();
    let mut out = Vec::new();
    for partition in partitions(m) {
        let b = partition.iter().max().map_or(0, |x| x + 1);
        let mut slots: Vec<(usize, Vec<usize>)> = Vec::new();
        for rel in 0..sig.len() {
            let k = sig.arity(rel);
            for idx in 0..crate::vcsp::tuple_count(k, b) {
                slots.push((rel, crate::vcsp::decode(idx, b, k)));
            }
        }
        if slots.len() > MAX_TYPE_BITS {
            return Err(OrbitError::TooManyCandidates {
                bits: slots.len(),
                limit: MAX_TYPE_BITS,
            });
        }
        for mask in 0u64..(1u64 << slots.len()) {
            let facts: Vec<(usize, Vec<usize>)> = slots
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, s)| s.clone())
                .collect();
            let t = OrbitType::new(partition.clone(), facts);
            if !mu.holds_in(&t.quotient(sig)) {
                out.push(t);
            }
        }
    }
    Ok(out)
}

/// Compatibility relation `C_{left,right}`: two orbits agree when the
/// sub-tuples at `left` and at `right` (0-based) have the same orbit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompatSpec {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl CompatSpec {
    pub fn name(&self) -> String {
        let show = |v: &[usize]| v.iter().map(|c| format!("{}", c + 1)).collect::<Vec<_>>().join(",");
        format!("C[{}|{}]", show(&self.left), show(&self.right))
    }

    pub fn holds(&self, a: &OrbitType, b: &OrbitType) -> bool {
        a.project(&self.left) == b.project(&self.right)
    }
}

/// All `C_{i,j}` for `i, j : {1..p} → {1..m}`, `p = 1..m`, in lexicographic order.
pub fn compat_specs(m: usize) -> Vec<CompatSpec> {
    let mut out = Vec::new();
    for p in 1..=m {
        let maps: Vec<Vec<usize>> = (0..crate::vcsp::tuple_count(p, m))
            .map(|i| crate::vcsp::decode(i, m, p))
            .collect();
        for left in &maps {
            for right in &maps {
                out.push(CompatSpec {
                    left: left.clone(),
                    right: right.clone(),
                });
            }
        }
    }
    out
}

/// Symbols of the type structure: `R*` per source relation (priced by the
/// exogenous set), then a crisp `R*x` per source relation for exogenous
/// single tuples, then the compatibility relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeSignature {
    pub signature: Signature,
    pub sources: usize,
    pub compat: Vec<CompatSpec>,
}

impl TypeSignature {
    pub fn new(mu: &UnionQuery, m: usize) -> TypeSignature {
        let src = mu.signature();
        let mut signature = Signature::new();
        for rel in 0..src.len() {
            signature.add(&format!("{}*", src.name(rel)), 1).expect("fresh name");
        }
        for rel in 0..src.len() {
            signature.add(&format!("{}*x", src.name(rel)), 1).expect("fresh name");
        }
        let compat = compat_specs(m);
        for c in &compat {
            signature.add(&c.name(), 2).expect("fresh name");
        }
        TypeSignature {
            signature,
            sources: src.len(),
            compat,
        }
    }

    pub fn priced(&self, rel: usize) -> usize {
        rel
    }

    pub fn crisp(&self, rel: usize) -> usize {
        self.sources + rel
    }

    pub fn compat_symbol(&self, k: usize) -> usize {
        2 * self.sources + k
    }
}

/// Source signature for reductions: the query's relations, then a copy
/// `R^x` of each for exogenous single tuples.
pub fn source_signature(mu: &UnionQuery) -> Signature {
    let src = mu.signature();
    let mut sig = src.clone();
    for rel in 0..src.len() {
        sig.add(&exogenous_copy_name(src.name(rel)), src.arity(rel)).expect("fresh name");
    }
    sig
}

/// Name of the crisp copy of a relation used for exogenous single tuples.
pub fn exogenous_copy_name(name: &str) -> String {
    format!("{name}^x")
}

/// The finite valued structure over orbit types.
#[derive(Clone, Debug)]
pub struct TypeStructure {
    pub m: usize,
    pub sigma: Vec<usize>,
    pub types: Vec<OrbitType>,
    pub symbols: TypeSignature,
    pub structure: ValuedStructure,
}

/// Builds the type structure densely. `sigma` lists exogenous relations of
/// the query's signature.
pub fn build_type_structure(mu: &UnionQuery, sigma: &[usize], m: usize) -> Result<TypeStructure, OrbitError> {
    check_query(mu, m)?;
    let types = enumerate_orbit_types(mu, m)?;
    let symbols = TypeSignature::new(mu, m);
    let n = types.len();
    let entries = (n as u128) * (n as u128) * symbols.compat.len() as u128;
    if entries > DENSE_ENTRY_CAP as u128 {
        return Err(OrbitError::CapExceeded {
            needed: entries,
            cap: DENSE_ENTRY_CAP,
        });
    }
    let src = mu.signature();
    let mut rels = Vec::new();
    for rel in 0..src.len() {
        let k = src.arity(rel);
        let miss = if sigma.contains(&rel) { Cost::Infinite } else { Cost::one() };
        rels.push(ValuedRelation::from_fn(1, n, |t| {
            if types[t[0]].holds_on_prefix(rel, k) {
                Cost::zero()
            } else {
                miss.clone()
            }
        }));
    }
    for rel in 0..src.len() {
        let k = src.arity(rel);
        rels.push(ValuedRelation::from_fn(1, n, |t| {
            if types[t[0]].holds_on_prefix(rel, k) {
                Cost::zero()
            } else {
                Cost::Infinite
            }
        }));
    }
    let mut projections: BTreeMap<Vec<usize>, Vec<OrbitType>> = BTreeMap::new();
    for c in &symbols.compat {
        for coords in [&c.left, &c.right] {
            projections
                .entry(coords.clone())
                .or_insert_with(|| types.iter().map(|t| t.project(coords)).collect());
        }
    }
    for c in &symbols.compat {
        let (lp, rp) = (&projections[&c.left], &projections[&c.right]);
        rels.push(ValuedRelation::from_fn(2, n, |t| {
            if lp[t[0]] == rp[t[1]] {
                Cost::zero()
            } else {
                Cost::Infinite
            }
        }));
    }
    let elements = types.iter().map(|t| format!("{t}")).collect();
    let structure = ValuedStructure::new(elements, symbols.signature.clone(), rels)?;
    let mut sigma = sigma.to_vec();
    sigma.sort_unstable();
    sigma.dedup();
    Ok(TypeStructure {
        m,
        sigma,
        types,
        symbols,
        structure,
    })
}
