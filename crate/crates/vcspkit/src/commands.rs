//! The work behind each subcommand, returning the JSON it prints.

use std::path::Path;

use serde_json::{json, Map, Value};
use vcspkit_core::cost::{parse_rational, Cost};
use vcspkit_core::fractional::{core_reduce, find_cyclic_fpol, siggers_in_support, FractionalError};
use vcspkit_core::gadgets::{verify_loop_product, verify_nae_gadget, verify_triangle_gadget, loop_reference_model, GadgetReport};
use vcspkit_core::orbit::{build_type_structure, default_m};
use vcspkit_core::query::{parse_query_file, QueryFile, RelationalStructure, Signature};
use vcspkit_core::resilience::{project_database, resilience_solve, BagDatabase, RemovedFact, Route};
use vcspkit_core::rpq::{evaluate_rpq, parse_rpq_symbols, rpq_resilience};
use vcspkit_core::solve::{solve_blp, solve_exact};
use vcspkit_core::vcsp::ValuedStructure;

use crate::db::{load_bag_database, DatabaseFormat};
use crate::error::{read_file, Error, Result};
use crate::structure::{
    cost_to_json, instance_from_json, rational_to_json, structure_from_json, valued_structure_from_json,
    valued_structure_to_json,
};
use crate::witness::triangle_witness_model;

pub fn load_valued_structure(path: &Path) -> Result<ValuedStructure> {
    valued_structure_from_json(&read_file(path)?)
}

pub fn load_structure(path: &Path) -> Result<RelationalStructure> {
    structure_from_json(&read_file(path)?)
}

pub fn load_query(path: &Path) -> Result<QueryFile> {
    Ok(parse_query_file(&read_file(path)?)?)
}

pub fn load_database(path: &Path, format: Option<DatabaseFormat>) -> Result<BagDatabase> {
    load_bag_database(path, format.unwrap_or_else(|| DatabaseFormat::detect(path)))
}

/// Exact optimum, an optimal assignment and the relaxation's bound.
pub fn vcsp_solve(gamma: &ValuedStructure, instance_text: &str, threshold: Option<&str>) -> Result<Value> {
    let doc = instance_from_json(instance_text, gamma)?;
    doc.expr.validate(gamma)?;
    let threshold = match threshold {
        Some(t) => Some(parse_rational(t)?),
        None => doc.threshold,
    };
    let exact = solve_exact(&doc.expr, gamma);
    let blp = solve_blp(&doc.expr, gamma)?;
    let witness = match &exact.witness {
        Some(w) if exact.cost.is_finite() => {
            let m: Map<String, Value> = doc
                .expr
                .variables()
                .iter()
                .zip(w)
                .map(|(v, &e)| (v.clone(), json!(gamma.elements()[e])))
                .collect();
            Value::Object(m)
        }
        _ => Value::Null,
    };
    let mut out = Map::new();
    out.insert("cost".into(), cost_to_json(&exact.cost));
    out.insert("witness".into(), witness);
    out.insert("blp_bound".into(), cost_to_json(&blp.bound));
    if let Some(u) = threshold {
        out.insert("threshold".into(), rational_to_json(&u));
        out.insert("within_threshold".into(), json!(exact.cost <= Cost::Finite(u)));
    }
    Ok(Value::Object(out))
}

fn capped<T>(r: std::result::Result<T, FractionalError>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(FractionalError::CapExceeded { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Cyclic fractional polymorphism search, the Siggers test and the core.
/// Searches that would exceed `cap` operations report `"cap"`.
pub fn classify(gamma: &ValuedStructure, arity: usize, siggers: bool, cap: usize) -> Result<Value> {
    let mut out = Map::new();
    match capped(find_cyclic_fpol(gamma, arity, cap))? {
        None => {
            out.insert("cyclic_fpol".into(), json!("cap"));
        }
        Some(None) => {
            out.insert("cyclic_fpol".into(), json!("none"));
        }
        Some(Some(omega)) => {
            out.insert("cyclic_fpol".into(), json!("found"));
            let support: Vec<Value> = omega
                .support()
                .iter()
                .map(|(f, w)| {
                    let table: Vec<&str> = f.table().iter().map(|&e| gamma.elements()[e].as_str()).collect();
                    json!({"weight": rational_to_json(w), "table": table})
                })
                .collect();
            out.insert("support".into(), Value::Array(support));
        }
    }
    let sig = if siggers {
        match capped(siggers_in_support(gamma, cap))? {
            Some(b) => json!(b),
            None => json!("cap"),
        }
    } else {
        Value::Null
    };
    out.insert("siggers_support".into(), sig);
    match capped(core_reduce(gamma, cap))? {
        Some(core) => {
            out.insert("core_domain_size".into(), json!(core.kept.len()));
            let kept: Vec<&str> = core.kept.iter().map(|&e| gamma.elements()[e].as_str()).collect();
            out.insert("core_elements".into(), json!(kept));
        }
        None => {
            out.insert("core_domain_size".into(), json!("cap"));
        }
    }
    Ok(Value::Object(out))
}

/// How `resilience` picks its route.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RouteChoice {
    Auto,
    Hitting,
    Dual(std::path::PathBuf),
    Types,
}

impl std::str::FromStr for RouteChoice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<RouteChoice, String> {
        match s {
            "auto" => Ok(RouteChoice::Auto),
            "hitting" => Ok(RouteChoice::Hitting),
            "types" => Ok(RouteChoice::Types),
            _ => match s.strip_prefix("dual=") {
                Some(p) if !p.is_empty() => Ok(RouteChoice::Dual(p.into())),
                _ => Err(format!("unknown route `{s}`; expected auto, hitting, dual=<file> or types")),
            },
        }
    }
}

fn removed_to_json(removed: &[RemovedFact], sig: &Signature, elements: &[String]) -> Value {
    let items: Vec<Value> = removed
        .iter()
        .map(|f| {
            let t: Vec<&str> = f.tuple.iter().map(|&e| elements[e].as_str()).collect();
            json!({"rel": sig.name(f.rel), "tuple": t, "mult": f.mult})
        })
        .collect();
    Value::Array(items)
}

/// The query's exogenous declarations are added to the database's own.
pub fn prepare_database(db: &BagDatabase, query: &QueryFile) -> Result<BagDatabase> {
    let mut db = project_database(db, query.query.signature())?;
    for &rel in &query.exogenous {
        db.set_exogenous(rel, true);
    }
    Ok(db)
}

pub struct ResilienceOptions<'a> {
    pub route: RouteChoice,
    pub threshold: Option<u64>,
    pub m: Option<usize>,
    pub export_types: Option<&'a Path>,
}

pub fn resilience(query: &QueryFile, db: &BagDatabase, opts: &ResilienceOptions<'_>) -> Result<Value> {
    let mu = &query.query;
    let db = prepare_database(db, query)?;
    let dual;
    let route = match &opts.route {
        RouteChoice::Auto => Route::Auto,
        RouteChoice::Hitting => Route::Hitting,
        RouteChoice::Dual(p) => {
            dual = load_structure(p)?;
            Route::Dual(&dual)
        }
        RouteChoice::Types => Route::Types { m: opts.m },
    };
    if let Some(path) = opts.export_types {
        let sigma = db.exogenous_relations();
        let ts = build_type_structure(mu, &sigma, opts.m.unwrap_or_else(|| default_m(mu)))?;
        let text = serde_json::to_string_pretty(&valued_structure_to_json(&ts.structure))?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    let res = resilience_solve(&db, mu, route)?;
    let mut out = Map::new();
    out.insert("resilience".into(), cost_to_json(&res.value));
    out.insert("removed".into(), removed_to_json(&res.removed, db.signature(), db.elements()));
    out.insert("route".into(), json!(res.route.to_string()));
    if let Some(u) = opts.threshold {
        out.insert("threshold".into(), json!(u));
        out.insert("within_threshold".into(), json!(res.value <= Cost::int(u as i64)));
    }
    Ok(Value::Object(out))
}

/// Gadget names accepted by `gadgets verify`.
pub const GADGETS: [&str; 4] = ["nae", "triangle", "mu1", "loop"];

pub fn verify_gadget(name: &str, model: Option<&RelationalStructure>) -> Result<GadgetReport> {
    Ok(match name {
        "nae" => verify_nae_gadget()?,
        "triangle" => match model {
            Some(m) => verify_triangle_gadget(m)?,
            None => verify_triangle_gadget(&triangle_witness_model())?,
        },
        "mu1" | "loop" => match model {
            Some(m) => verify_loop_product(m)?,
            None => verify_loop_product(&loop_reference_model())?,
        },
        _ => {
            return Err(Error::Format(format!(
                "unknown gadget `{name}`; expected one of {}",
                GADGETS.join(", ")
            )))
        }
    })
}

pub fn report_to_json(report: &GadgetReport) -> Value {
    let claims: Vec<Value> = report
        .claims
        .iter()
        .map(|c| json!({"name": c.name, "holds": c.holds(), "counterexample": c.counterexample}))
        .collect();
    json!({"gadget": report.gadget, "passed": report.passed(), "claims": claims})
}

/// Answer pairs of a path query, or its resilience.
pub fn rpq(query: &str, db: &BagDatabase, with_resilience: bool) -> Result<Value> {
    let q = parse_rpq_symbols(query)?;
    let name = |e: usize| db.elements()[e].as_str();
    if with_resilience {
        let r = rpq_resilience(db, &q)?;
        Ok(json!({
            "query": q.to_string(),
            "resilience": cost_to_json(&r.value),
            "removed": removed_to_json(&r.removed, db.signature(), db.elements()),
        }))
    } else {
        let answers: Vec<Value> = evaluate_rpq(db, &q)?.into_iter().map(|(a, b)| json!([name(a), name(b)])).collect();
        Ok(json!({"query": q.to_string(), "answers": answers}))
    }
}
