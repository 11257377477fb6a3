//! Resilience of bag databases: the fewest tuple copies whose removal makes
//! a union of conjunctive queries false. Three exact routes are offered, a
//! weighted hitting set, a finite dual as a valued structure, and the orbit
//! type reduction, together with a brute-force oracle.

mod db;
mod hitting;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::cost::{rat, Cost};
use crate::orbit::{self, OrbitError};
use crate::query::{ConjunctiveQuery, QueryError, RelationalStructure, Signature, UnionQuery};
use crate::solve::solve_exact;
use crate::vcsp::{apply_clone_operator, dual_to_valued, CloneOp, Instance, RelRef, TauExpression, ValuedStructure, VcspError};

pub use db::{BagDatabase, Fact};
pub use hitting::{build_hitting_set, decide_hitting_set, solve_hitting_set, HittingSetInstance, HittingSolution};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResilienceError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("multiplicities must be positive")]
    NonPositiveMultiplicity,
    #[error(transparent)]
    Vcsp(#[from] VcspError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("removable weight {weight} exceeds the brute-force cap of {cap}")]
    CapExceeded { weight: u64, cap: u64 },
    #[error("route unavailable: {0}")]
    RouteUnavailable(String),
    #[error("the {0} route returned a removal that does not falsify the query")]
    Unverified(String),
}

/// Largest removable weight the brute-force oracle accepts.
pub const BRUTE_FORCE_CAP: u64 = 24;

/// Largest number of component choices tried by the decomposition.
pub const DECOMPOSITION_CAP: usize = 256;

/// Tuple lengths up to which the types route builds the type structure and
/// solves it by branch and bound instead of the direct method.
const DENSE_TYPE_LIMIT: usize = 16;
const DENSE_VARIABLE_LIMIT: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route<'a> {
    /// Currently the hitting-set route.
    Auto,
    Hitting,
    /// A finite dual of the query over the same relation names.
    Dual(&'a RelationalStructure),
    /// Orbit types of m-tuples; the default m is the largest arity, at least 2.
    Types { m: Option<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RouteUsed {
    Hitting,
    Dual,
    Types { m: usize, dense: bool },
    BruteForce,
}

impl core::fmt::Display for RouteUsed {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RouteUsed::Hitting => write!(f, "hitting"),
            RouteUsed::Dual => write!(f, "dual"),
            RouteUsed::Types { m, .. } => write!(f, "types(m={m})"),
            RouteUsed::BruteForce => write!(f, "brute-force"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RemovedFact {
    pub rel: usize,
    pub tuple: Vec<usize>,
    pub mult: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResilienceResult {
    /// Minimum removed weight, ∞ when the query cannot be falsified.
    pub value: Cost,
    /// Sorted by relation and tuple; empty when the value is ∞.
    pub removed: Vec<RemovedFact>,
    pub route: RouteUsed,
}

/// Keeps only the relations of `sig` (matched by name), with their
/// exogeneity. Missing relations are empty.
pub fn project_database(db: &BagDatabase, sig: &Signature) -> Result<BagDatabase, ResilienceError> {
    let mut out = BagDatabase::new(sig.clone(), db.elements().to_vec());
    for rel in 0..sig.len() {
        let Some(src) = db.signature().index_of(sig.name(rel)) else { continue };
        if db.signature().arity(src) != sig.arity(rel) {
            return Err(QueryError::TupleArity {
                relation: sig.name(rel).to_string(),
                expected: sig.arity(rel),
                found: db.signature().arity(src),
            }
            .into());
        }
        out.set_exogenous(rel, db.is_exogenous_relation(src));
        for (tuple, &mult) in db.tuples(src) {
            out.add(rel, tuple.clone(), mult)?;
            if db.is_exogenous(src, tuple) && !db.is_exogenous_relation(src) {
                out.mark_exogenous_tuple(rel, tuple.clone())?;
            }
        }
    }
    Ok(out)
}

fn falsified(db: &BagDatabase, mu: &UnionQuery, removed: &[RemovedFact]) -> bool {
    let ids: Vec<(usize, Vec<usize>)> = removed.iter().map(|r| (r.rel, r.tuple.clone())).collect();
    !mu.holds_in(&db.without(&ids).to_structure())
}

fn removal(db: &BagDatabase, ids: impl IntoIterator<Item = (usize, Vec<usize>)>) -> Vec<RemovedFact> {
    let mut out: Vec<RemovedFact> = ids
        .into_iter()
        .map(|(rel, tuple)| RemovedFact {
            mult: db.multiplicity(rel, &tuple),
            rel,
            tuple,
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn removed_weight(removed: &[RemovedFact]) -> Cost {
    Cost::int(removed.iter().map(|r| r.mult as i64).sum())
}

/// Exhaustive oracle: tries removals of endogenous tuple identities in order
/// of increasing weight and returns the first that falsifies the query.
pub fn brute_force_resilience(db: &BagDatabase, mu: &UnionQuery) -> Result<ResilienceResult, ResilienceError> {
    brute_force_resilience_with_cap(db, mu, BRUTE_FORCE_CAP)
}

pub fn brute_force_resilience_with_cap(
    db: &BagDatabase,
    mu: &UnionQuery,
    cap: u64,
) -> Result<ResilienceResult, ResilienceError> {
    let db = project_database(db, mu.signature())?;
    let facts: Vec<Fact> = db.facts().into_iter().filter(|f| !f.exogenous).collect();
    let total: u64 = facts.iter().map(|f| f.mult).sum();
    if total > cap {
        return Err(ResilienceError::CapExceeded { weight: total, cap });
    }
    let mut structure = db.to_structure();
    for target in 0..=total {
        let mut chosen = Vec::new();
        if exact_weight(&facts, 0, target, &mut chosen, &mut structure, mu) {
            let removed = removal(&db, chosen.iter().map(|&i| (facts[i].rel, facts[i].tuple.clone())));
            return Ok(ResilienceResult {
                value: Cost::int(target as i64),
                removed,
                route: RouteUsed::BruteForce,
            });
        }
    }
    Ok(ResilienceResult {
        value: Cost::Infinite,
        removed: Vec::new(),
        route: RouteUsed::BruteForce,
    })
}

/// Subsets of `facts[from..]` of weight exactly `left`, lexicographically.
fn exact_weight(
    facts: &[Fact],
    from: usize,
    left: u64,
    chosen: &mut Vec<usize>,
    s: &mut RelationalStructure,
    mu: &UnionQuery,
) -> bool {
    if left == 0 {
        return !mu.holds_in(s);
    }
    for i in from..facts.len() {
        let f = &facts[i];
        if f.mult > left {
            continue;
        }
        s.remove_tuple(f.rel, &f.tuple);
        chosen.push(i);
        if exact_weight(facts, i + 1, left - f.mult, chosen, s, mu) {
            return true;
        }
        chosen.pop();
        s.add_tuple(f.rel, f.tuple.clone()).expect("restoring a removed tuple");
    }
    false
}

/// A bag database as a sum over a valued structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualEncoding {
    pub structure: ValuedStructure,
    pub expression: TauExpression,
}

/// One summand per tuple copy over the valued dual, variables named after
/// the elements. Exogenous single tuples use a crisp copy `R^x` of the
/// relation that is 0 exactly on the dual's tuples.
pub fn database_to_expression(db: &BagDatabase, dual: &RelationalStructure) -> Result<DualEncoding, ResilienceError> {
    let dsig = dual.signature();
    let mut rel_map = Vec::new();
    for rel in 0..db.signature().len() {
        let name = db.signature().name(rel);
        let Some(d) = dsig.index_of(name) else {
            if db.tuples(rel).is_empty() {
                rel_map.push(None);
                continue;
            }
            return Err(ResilienceError::RouteUnavailable(format!("the dual has no relation `{name}`")));
        };
        if dsig.arity(d) != db.signature().arity(rel) {
            return Err(ResilienceError::RouteUnavailable(format!("`{name}` has a different arity in the dual")));
        }
        rel_map.push(Some(d));
    }
    let sigma: Vec<usize> = (0..db.signature().len())
        .filter(|&r| db.is_exogenous_relation(r))
        .filter_map(|r| rel_map[r])
        .collect();
    let mut structure = dual_to_valued(dual, &sigma);
    let mut copies = alloc::vec![None; dsig.len()];
    if db.has_exogenous_tuples() {
        for d in 0..dsig.len() {
            let crisp = apply_clone_operator(&CloneOp::Opt, structure.relation(d))?;
            let name = orbit::exogenous_copy_name(dsig.name(d));
            structure = structure.with_relation(&name, crisp)?;
            copies[d] = Some(dsig.len() + d);
        }
    }
    let mut expression = TauExpression::new(db.elements().to_vec());
    for f in db.facts() {
        let d = rel_map[f.rel].expect("relations with tuples are mapped");
        let sym = if f.exogenous && !db.is_exogenous_relation(f.rel) {
            copies[d].expect("copies exist when exogenous tuples do")
        } else {
            d
        };
        for _ in 0..f.mult {
            expression.push(RelRef::Symbol(sym), f.tuple.clone());
        }
    }
    Ok(DualEncoding { structure, expression })
}

/// Inverse of the encoding: every summand adds one copy, summands over a
/// crisp copy `R^x` mark the tuple exogenous. `exogenous` names whole
/// exogenous relations.
pub fn expression_to_database(
    expr: &TauExpression,
    gamma_signature: &Signature,
    signature: &Signature,
    exogenous: &[&str],
) -> Result<BagDatabase, ResilienceError> {
    let mut db = BagDatabase::new(signature.clone(), expr.variables().to_vec());
    for name in exogenous {
        let r = signature
            .index_of(name)
            .ok_or_else(|| QueryError::UnknownSymbol(name.to_string()))?;
        db.set_exogenous(r, true);
    }
    let mut marks = Vec::new();
    for atom in expr.atoms() {
        let RelRef::Symbol(s) = atom.rel else {
            return Err(VcspError::Syntax("built-in relations have no database reading".to_string()).into());
        };
        let name = gamma_signature.name(s);
        let (stem, crisp) = match name.strip_suffix("^x") {
            Some(stem) if signature.index_of(stem).is_some() => (stem, true),
            _ => (name, false),
        };
        let r = signature
            .index_of(stem)
            .ok_or_else(|| QueryError::UnknownSymbol(stem.to_string()))?;
        db.add(r, atom.args.clone(), 1)?;
        if crisp {
            marks.push((r, atom.args.clone()));
        }
    }
    for (r, t) in marks {
        db.mark_exogenous_tuple(r, t)?;
    }
    Ok(db)
}

/// The source instance of the type reduction: one variable per element that
/// occurs in a tuple, one summand per tuple copy, `R^x` for exogenous single
/// tuples. Returns the instance and the element behind each variable.
pub fn database_to_source_instance(db: &BagDatabase, mu: &UnionQuery) -> Result<(Instance, Vec<usize>), ResilienceError> {
    let db = project_database(db, mu.signature())?;
    let t = mu.signature().len();
    let facts = db.facts();
    let mut active: Vec<usize> = facts.iter().flat_map(|f| f.tuple.iter().copied()).collect();
    active.sort_unstable();
    active.dedup();
    let mut expr = TauExpression::new(active.iter().map(|&e| db.elements()[e].clone()).collect());
    for f in &facts {
        let args: Vec<usize> = f
            .tuple
            .iter()
            .map(|e| active.binary_search(e).expect("active element"))
            .collect();
        let sym = if f.exogenous && !db.is_exogenous_relation(f.rel) { t + f.rel } else { f.rel };
        for _ in 0..f.mult {
            expr.push(RelRef::Symbol(sym), args.clone());
        }
    }
    Ok((Instance::new(expr, rat(0)), active))
}

/// Removes components of a disjunct implied by other components.
fn essential_components(d: &ConjunctiveQuery) -> Vec<ConjunctiveQuery> {
    let mut kept: Vec<ConjunctiveQuery> = Vec::new();
    for c in d.components() {
        if kept.iter().any(|k| k.implies(&c)) {
            continue;
        }
        kept.retain(|k| !c.implies(k));
        kept.push(c);
    }
    kept
}

/// Drops disjuncts that imply another disjunct.
fn simplify_union(disjuncts: Vec<ConjunctiveQuery>) -> Result<UnionQuery, QueryError> {
    let mut kept: Vec<ConjunctiveQuery> = Vec::new();
    for d in disjuncts {
        if kept.iter().any(|k| d.implies(k)) {
            continue;
        }
        kept.retain(|k| !k.implies(&d));
        kept.push(d);
    }
    UnionQuery::new(kept)
}

/// A database falsifies a conjunction of components iff it falsifies one of
/// them, so removing enough to falsify the union amounts to picking one
/// component per disjunct and falsifying their union. Returns every choice
/// with redundant components and disjuncts dropped, or `None` past `cap`.
pub fn component_choices(mu: &UnionQuery, cap: usize) -> Option<Vec<UnionQuery>> {
    let per: Vec<Vec<ConjunctiveQuery>> = mu.disjuncts().iter().map(essential_components).collect();
    let mut count = 1usize;
    for p in &per {
        count = count.checked_mul(p.len()).filter(|&c| c <= cap)?;
    }
    let mut out = Vec::with_capacity(count);
    let mut idx = alloc::vec![0usize; per.len()];
    loop {
        let chosen = per.iter().zip(&idx).map(|(p, &i)| p[i].clone()).collect();
        out.push(simplify_union(chosen).expect("choices share the signature"));
        let mut k = per.len();
        loop {
            if k == 0 {
                return Some(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn hitting_route(db: &BagDatabase, mu: &UnionQuery) -> ResilienceResult {
    let inst = build_hitting_set(db, mu);
    let sol = solve_hitting_set(&inst);
    let removed = if sol.cost.is_finite() {
        removal(db, sol.chosen.iter().map(|&v| inst.vertices[v].clone()))
    } else {
        Vec::new()
    };
    ResilienceResult {
        value: sol.cost,
        removed,
        route: RouteUsed::Hitting,
    }
}

fn dual_route(db: &BagDatabase, dual: &RelationalStructure) -> Result<ResilienceResult, ResilienceError> {
    let enc = database_to_expression(db, dual)?;
    let res = solve_exact(&enc.expression, &enc.structure);
    let removed = match (&res.witness, res.cost.is_finite()) {
        (Some(h), true) => removal(
            db,
            db.facts().into_iter().filter(|f| !f.exogenous).filter_map(|f| {
                let d = dual.signature().index_of(db.signature().name(f.rel)).expect("mapped relation");
                let image: Vec<usize> = f.tuple.iter().map(|&e| h[e]).collect();
                (!dual.contains(d, &image)).then_some((f.rel, f.tuple))
            }),
        ),
        _ => Vec::new(),
    };
    Ok(ResilienceResult {
        value: res.cost,
        removed,
        route: RouteUsed::Dual,
    })
}

fn types_route_single(db: &BagDatabase, mu: &UnionQuery, m: Option<usize>) -> Result<ResilienceResult, ResilienceError> {
    let m = m.unwrap_or_else(|| orbit::default_m(mu));
    let sigma = db.exogenous_relations();
    let (source, active) = database_to_source_instance(db, mu)?;
    let red = orbit::reduce_to_type_instance(&source, mu, &sigma, m, orbit::DEFAULT_VARIABLE_CAP)?;
    let dense_structure = if red.instance.expr.num_vars() <= DENSE_VARIABLE_LIMIT {
        match orbit::enumerate_orbit_types(mu, m) {
            Ok(types) if types.len() <= DENSE_TYPE_LIMIT => Some(orbit::build_type_structure(mu, &sigma, m)?),
            _ => None,
        }
    } else {
        None
    };
    let dense = dense_structure.is_some();
    let sol = match &dense_structure {
        Some(ts) => orbit::solve_type_reduction_dense(&red, ts)?,
        None => orbit::solve_type_reduction(&red)?,
    };
    let removed = match &sol.assignment {
        Some(a) => removal(
            db,
            db.facts().into_iter().filter(|f| !f.exogenous).filter_map(|f| {
                let vars: Vec<usize> = f.tuple.iter().map(|e| active.binary_search(e).expect("active")).collect();
                let kept = a[red.reader(&vars)].holds_on_prefix(f.rel, f.tuple.len());
                (!kept).then_some((f.rel, f.tuple))
            }),
        ),
        None => Vec::new(),
    };
    Ok(ResilienceResult {
        value: sol.cost,
        removed,
        route: RouteUsed::Types { m, dense },
    })
}

fn types_route(db: &BagDatabase, mu: &UnionQuery, m: Option<usize>) -> Result<ResilienceResult, ResilienceError> {
    let choices = component_choices(mu, DECOMPOSITION_CAP).ok_or_else(|| {
        ResilienceError::RouteUnavailable(format!("more than {DECOMPOSITION_CAP} component choices"))
    })?;
    let mut best: Option<ResilienceResult> = None;
    for q in &choices {
        if let Some(i) = q.disjuncts().iter().position(|d| !crate::query::analyze(d).gaifman_complete) {
            return Err(ResilienceError::RouteUnavailable(format!(
                "a component of disjunct {} does not have a complete Gaifman graph",
                mu.disjuncts().iter().position(|d| d.components().contains(&q.disjuncts()[i])).unwrap_or(i)
            )));
        }
        let r = types_route_single(db, q, m)?;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one choice"))
}

/// Resilience of `mu` on `db` by the chosen route. Relations of `db` outside
/// the query's signature are ignored. A finite answer's removal set is checked
/// to falsify the query and to weigh exactly the reported value.
pub fn resilience_solve(db: &BagDatabase, mu: &UnionQuery, route: Route<'_>) -> Result<ResilienceResult, ResilienceError> {
    let db = project_database(db, mu.signature())?;
    let res = match route {
        Route::Auto | Route::Hitting => hitting_route(&db, mu),
        Route::Dual(b) => dual_route(&db, b)?,
        Route::Types { m } => types_route(&db, mu, m)?,
    };
    if res.value.is_finite() && (removed_weight(&res.removed) != res.value || !falsified(&db, mu, &res.removed)) {
        return Err(ResilienceError::Unverified(res.route.to_string()));
    }
    Ok(res)
}

/// Whether at most `u` copies suffice; never when the query is unfalsifiable.
pub fn resilience_decide(db: &BagDatabase, mu: &UnionQuery, u: u64, route: Route<'_>) -> Result<bool, ResilienceError> {
    if let Route::Auto | Route::Hitting = route {
        let db = project_database(db, mu.signature())?;
        return Ok(decide_hitting_set(&build_hitting_set(&db, mu), u));
    }
    Ok(resilience_solve(db, mu, route)?.value <= Cost::int(u as i64))
}
