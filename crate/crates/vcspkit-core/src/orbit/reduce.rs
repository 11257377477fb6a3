use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{check_query, OrbitError, OrbitType, TypeSignature, TypeStructure};
use crate::cost::Cost;
use crate::query::{enumerate_homomorphisms, RelationalStructure, Signature, UnionQuery};
use crate::resilience::{solve_hitting_set, HittingSetInstance};
use crate::solve::solve_exact;
use crate::vcsp::{decode, encode, tuple_count, Instance, RelRef, TauExpression};

/// Largest number of reduced variables (source elements to the power m).
pub const DEFAULT_VARIABLE_CAP: usize = 4096;

/// An instance over the source signature rewritten onto orbit types: one
/// variable per m-tuple of source variables.
#[derive(Clone, Debug)]
pub struct TypeReduction {
    pub m: usize,
    pub source_vars: usize,
    pub mu: UnionQuery,
    pub sigma: Vec<usize>,
    pub symbols: TypeSignature,
    pub instance: Instance,
}

impl TypeReduction {
    /// The source tuple behind a reduced variable.
    pub fn variable_tuple(&self, y: usize) -> Vec<usize> {
        decode(y, self.source_vars, self.m)
    }

    pub fn variable_of(&self, tuple: &[usize]) -> usize {
        encode(tuple, self.source_vars)
    }

    /// The variable reading a k-tuple: the tuple padded with its last entry.
    pub fn reader(&self, tuple: &[usize]) -> usize {
        let mut t = tuple.to_vec();
        let last = *t.last().expect("arity at least 1");
        t.resize(self.m, last);
        self.variable_of(&t)
    }
}

/// Rewrites `inst`, whose atoms use the source signature of `mu` (relations,
/// then their crisp copies for exogenous single tuples).
pub fn reduce_to_type_instance(
    inst: &Instance,
    mu: &UnionQuery,
    sigma: &[usize],
    m: usize,
    cap: usize,
) -> Result<TypeReduction, OrbitError> {
    check_query(mu, m)?;
    let src = mu.signature();
    let t = src.len();
    let n = inst.expr.num_vars();
    let count = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(OrbitError::CapExceeded { needed: count, cap });
    }
    let count = count as usize;
    let symbols = TypeSignature::new(mu, m);
    let names: Vec<String> = (0..count)
        .map(|y| {
            let parts: Vec<&str> = decode(y, n, m).iter().map(|&v| inst.expr.variables()[v].as_str()).collect();
            format!("y({})", parts.join(","))
        })
        .collect();
    let mut sigma = sigma.to_vec();
    sigma.sort_unstable();
    sigma.dedup();
    let mut red = TypeReduction {
        m,
        source_vars: n,
        mu: mu.clone(),
        sigma,
        symbols,
        instance: Instance::new(TauExpression::new(names), inst.threshold.clone()),
    };

    let mut atoms = Vec::new();
    for atom in inst.expr.atoms() {
        let RelRef::Symbol(s) = atom.rel else {
            let name = match atom.rel {
                RelRef::Equality => crate::vcsp::EQUALITY_NAME,
                _ => crate::vcsp::EMPTY_NAME,
            };
            return Err(OrbitError::UnsupportedAtom(name.to_string()));
        };
        if s >= 2 * t {
            return Err(OrbitError::UnsupportedAtom(format!("#{s}")));
        }
        let rel = s % t;
        if atom.args.len() != src.arity(rel) || atom.args.is_empty() {
            return Err(OrbitError::UnsupportedAtom(src.name(rel).to_string()));
        }
        if let Some(&v) = atom.args.iter().find(|&&v| v >= n) {
            return Err(crate::vcsp::VcspError::VariableOutOfRange(v).into());
        }
        let sym = if s < t { red.symbols.priced(rel) } else { red.symbols.crisp(rel) };
        atoms.push((sym, alloc::vec![red.reader(&atom.args)]));
    }

    // Compatibility: C_{i,j}(y(a), y(b)) whenever a∘i = b∘j.
    let tuples: Vec<Vec<usize>> = (0..count).map(|y| decode(y, n, m)).collect();
    let compose = |x: &[usize], coords: &[usize]| -> Vec<usize> { coords.iter().map(|&c| x[c]).collect() };
    for (k, c) in red.symbols.compat.iter().enumerate() {
        let mut by_right: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (b, x) in tuples.iter().enumerate() {
            by_right.entry(compose(x, &c.right)).or_default().push(b);
        }
        for (a, x) in tuples.iter().enumerate() {
            if let Some(bs) = by_right.get(&compose(x, &c.left)) {
                for &b in bs {
                    atoms.push((red.symbols.compat_symbol(k), alloc::vec![a, b]));
                }
            }
        }
    }
    for (sym, args) in atoms {
        red.instance.expr.push(RelRef::Symbol(sym), args);
    }
    Ok(red)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeSolution {
    pub cost: Cost,
    /// One orbit type per reduced variable; `None` when the cost is ∞.
    pub assignment: Option<Vec<OrbitType>>,
}

fn is_valid_type(t: &OrbitType, m: usize, sig: &Signature, mu: &UnionQuery) -> bool {
    if t.len() != m || !super::is_restricted_growth(t.partition()) {
        return false;
    }
    let b = t.blocks();
    let fits = t
        .facts()
        .iter()
        .all(|(r, tu)| *r < sig.len() && tu.len() == sig.arity(*r) && tu.iter().all(|&x| x < b));
    fits && !mu.holds_in(&t.quotient(sig))
}

/// Exact cost of an assignment of orbit types, or `None` when some value is
/// not an orbit type of a μ-free tuple.
pub fn evaluate_type_assignment(red: &TypeReduction, assignment: &[OrbitType]) -> Option<Cost> {
    let sig = red.mu.signature();
    if assignment.len() != red.instance.expr.num_vars()
        || !assignment.iter().all(|t| is_valid_type(t, red.m, sig, &red.mu))
    {
        return None;
    }
    let t = red.symbols.sources;
    let mut projections: BTreeMap<(usize, &[usize]), OrbitType> = BTreeMap::new();
    let mut total = Cost::zero();
    for atom in red.instance.expr.atoms() {
        let RelRef::Symbol(s) = atom.rel else { return None };
        let c = if s < 2 * t {
            let rel = s % t;
            let holds = assignment[atom.args[0]].holds_on_prefix(rel, sig.arity(rel));
            if holds {
                Cost::zero()
            } else if s >= t || red.sigma.contains(&rel) {
                Cost::Infinite
            } else {
                Cost::one()
            }
        } else {
            let spec = &red.symbols.compat[s - 2 * t];
            let (a, b) = (atom.args[0], atom.args[1]);
            let left = projections
                .entry((a, spec.left.as_slice()))
                .or_insert_with(|| assignment[a].project(&spec.left))
                .clone();
            let right = projections
                .entry((b, spec.right.as_slice()))
                .or_insert_with(|| assignment[b].project(&spec.right));
            if left == *right {
                Cost::zero()
            } else {
                Cost::Infinite
            }
        };
        total = total + c;
        if total.is_infinite() {
            return Some(Cost::Infinite);
        }
    }
    Some(total)
}

/// Solves over the dense type structure by branch and bound.
pub fn solve_type_reduction_dense(red: &TypeReduction, ts: &TypeStructure) -> Result<TypeSolution, OrbitError> {
    if ts.symbols != red.symbols || ts.m != red.m || ts.sigma != red.sigma {
        return Err(OrbitError::SignatureMismatch);
    }
    let res = solve_exact(&red.instance.expr, &ts.structure);
    let assignment = res
        .witness
        .filter(|_| res.cost.is_finite())
        .map(|w| w.iter().map(|&i| ts.types[i].clone()).collect::<Vec<_>>());
    if let Some(a) = &assignment {
        if evaluate_type_assignment(red, a).as_ref() != Some(&res.cost) {
            return Err(OrbitError::Unverified);
        }
    }
    Ok(TypeSolution {
        cost: res.cost,
        assignment,
    })
}

/// Solves without enumerating the types. Two exchange arguments make this
/// exact: an optimal assignment may be taken to keep distinct source
/// variables apart, and to keep only facts some unary atom reads. What is
/// left is to choose which read facts to drop so that no match of a disjunct
/// on at most m elements survives, a weighted hitting set. The witness
/// assigns each variable the orbit of its tuple in the kept structure and is
/// checked by exact evaluation.
pub fn solve_type_reduction(red: &TypeReduction) -> Result<TypeSolution, OrbitError> {
    let sig = red.mu.signature();
    let t = red.symbols.sources;
    let mut read: BTreeMap<(usize, Vec<usize>), Option<u64>> = BTreeMap::new();
    for atom in red.instance.expr.atoms() {
        let RelRef::Symbol(s) = atom.rel else { continue };
        if s >= 2 * t {
            continue;
        }
        let rel = s % t;
        let tuple = red.variable_tuple(atom.args[0])[..sig.arity(rel)].to_vec();
        let crisp = s >= t || red.sigma.contains(&rel);
        let w = read.entry((rel, tuple)).or_insert(Some(0));
        *w = match (*w, crisp) {
            (_, true) | (None, _) => None,
            (Some(c), false) => Some(c + 1),
        };
    }

    let mut structure = RelationalStructure::with_size(sig.clone(), red.source_vars);
    let mut vertices = Vec::new();
    let mut weights = Vec::new();
    for ((rel, tuple), w) in &read {
        structure.add_tuple(*rel, tuple.clone())?;
        if let Some(w) = w {
            vertices.push((*rel, tuple.clone()));
            weights.push(*w);
        }
    }
    let mut edges = Vec::new();
    for d in red.mu.disjuncts() {
        let canon = d.canonical_database();
        for h in enumerate_homomorphisms(&canon, &structure, None) {
            let mut image = h.clone();
            image.sort_unstable();
            image.dedup();
            if image.len() > red.m {
                continue;
            }
            let edge = d
                .atoms()
                .iter()
                .filter_map(|a| {
                    let img: Vec<usize> = a.args.iter().map(|&v| h[v]).collect();
                    vertices.binary_search(&(a.relation, img)).ok()
                })
                .collect();
            edges.push(edge);
        }
    }
    let inst = HittingSetInstance::new(vertices, weights, edges, false);
    let sol = solve_hitting_set(&inst);
    if sol.cost.is_infinite() {
        return Ok(TypeSolution {
            cost: Cost::Infinite,
            assignment: None,
        });
    }
    for &v in &sol.chosen {
        let (rel, tuple) = &inst.vertices[v];
        structure.remove_tuple(*rel, tuple);
    }
    let assignment: Vec<OrbitType> = (0..tuple_count(red.m, red.source_vars))
        .map(|y| OrbitType::of_tuple(&structure, &red.variable_tuple(y)))
        .collect();
    match evaluate_type_assignment(red, &assignment) {
        Some(c) if c == sol.cost => Ok(TypeSolution {
            cost: c,
            assignment: Some(assignment),
        }),
        _ => Err(OrbitError::Unverified),
    }
}

/// Whether the reduced instance has a solution within its threshold.
pub fn decide_type_reduction(red: &TypeReduction) -> Result<bool, OrbitError> {
    let sol = solve_type_reduction(red)?;
    Ok(sol.cost <= Cost::Finite(red.instance.threshold.clone()))
}
