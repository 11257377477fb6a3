//! Relational structures, valued structures and instances as JSON.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{json, Map, Value};
use vcspkit_core::cost::{format_rational, parse_rational, Cost, Rational};
use vcspkit_core::query::{RelationalStructure, Signature};
use vcspkit_core::vcsp::{RelRef, TauExpression, ValuedRelation, ValuedStructure};

use crate::db::{database_from_json, names, Name};
use crate::error::{Error, Result};

/// A relational structure in the database format; multiplicities and
/// exogeneity are ignored.
pub fn structure_from_json(text: &str) -> Result<RelationalStructure> {
    Ok(database_from_json(text)?.to_structure())
}

pub fn structure_to_json(s: &RelationalStructure) -> Value {
    let sig = s.signature();
    let mut relations = Map::new();
    let mut arities = Map::new();
    for rel in 0..sig.len() {
        let rows: Vec<Value> = s
            .tuples(rel)
            .iter()
            .map(|t| json!(t.iter().map(|&i| s.elements()[i].as_str()).collect::<Vec<_>>()))
            .collect();
        if rows.is_empty() {
            arities.insert(sig.name(rel).to_string(), json!(sig.arity(rel)));
        }
        relations.insert(sig.name(rel).to_string(), Value::Array(rows));
    }
    let mut out = Map::new();
    out.insert("elements".into(), json!(s.elements()));
    if !arities.is_empty() {
        out.insert("arities".into(), Value::Object(arities));
    }
    out.insert("relations".into(), Value::Object(relations));
    Value::Object(out)
}

/// A cost written as an integer, `"p/q"`, a decimal string or `"inf"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum CostValue {
    Int(i64),
    Text(String),
}

impl CostValue {
    fn parse(self) -> Result<Cost> {
        match self {
            CostValue::Int(v) => Ok(Cost::int(v)),
            CostValue::Text(s) => Ok(s.parse::<Cost>()?),
        }
    }
}

pub fn cost_to_json(c: &Cost) -> Value {
    Value::String(c.to_string())
}

pub fn rational_to_json(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn default_cost() -> CostValue {
    CostValue::Text("inf".into())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationFile {
    arity: usize,
    #[serde(default = "default_cost")]
    default: CostValue,
    #[serde(default)]
    entries: Vec<(Vec<Name>, CostValue)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValuedFile {
    domain: Vec<Name>,
    #[serde(default)]
    relations: Map<String, Value>,
}

/// Parses a valued structure. Tuples without an entry take the relation's
/// `default` cost, which is ∞ when omitted.
pub fn valued_structure_from_json(text: &str) -> Result<ValuedStructure> {
    let file: ValuedFile = serde_json::from_str(text)?;
    let domain = names(file.domain);
    let n = domain.len();
    let index: BTreeMap<&str, usize> = domain.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
    let mut sig = Signature::new();
    let mut relations = Vec::new();
    for (name, value) in file.relations {
        let r: RelationFile = serde_json::from_value(value).map_err(|e| Error::Format(format!("relation `{name}`: {e}")))?;
        sig.add(&name, r.arity)?;
        let mut rel = ValuedRelation::constant(r.arity, n, r.default.parse()?);
        for (tuple, cost) in r.entries {
            let tuple = names(tuple);
            if tuple.len() != r.arity {
                return Err(Error::Arity {
                    relation: name.clone(),
                    found: tuple.len(),
                    tuple,
                    expected: r.arity,
                });
            }
            let t = tuple
                .iter()
                .map(|e| index.get(e.as_str()).copied().ok_or_else(|| Error::UnknownElement(e.clone())))
                .collect::<Result<Vec<_>>>()?;
            rel.set(&t, cost.parse()?);
        }
        relations.push(rel);
    }
    Ok(ValuedStructure::new(domain, sig, relations)?)
}

/// Writes every tuple whose cost differs from the most common one.
pub fn valued_structure_to_json(g: &ValuedStructure) -> Value {
    let sig = g.signature();
    let mut relations = Map::new();
    for (i, r) in g.relations().iter().enumerate() {
        let mut counts: BTreeMap<&Cost, usize> = BTreeMap::new();
        for c in r.table() {
            *counts.entry(c).or_default() += 1;
        }
        let default = counts
            .iter()
            .max_by_key(|(_, &k)| k)
            .map(|(c, _)| (*c).clone())
            .unwrap_or(Cost::Infinite);
        let entries: Vec<Value> = (0..r.len())
            .filter(|&k| *r.at(k) != default)
            .map(|k| {
                let t: Vec<&str> = r.tuple(k).iter().map(|&e| g.elements()[e].as_str()).collect();
                json!([t, cost_to_json(r.at(k))])
            })
            .collect();
        relations.insert(
            sig.name(i).to_string(),
            json!({"arity": r.arity(), "default": cost_to_json(&default), "entries": entries}),
        );
    }
    json!({"domain": g.elements(), "relations": relations})
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Summand {
    Object { relation: String, args: Vec<Name> },
    Row(Vec<Name>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(default)]
    variables: Option<Vec<Name>>,
    summands: Vec<Summand>,
    #[serde(default)]
    threshold: Option<CostValue>,
}

/// A parsed instance: the expression and its threshold, if any.
#[derive(Clone, Debug)]
pub struct InstanceDocument {
    pub expr: TauExpression,
    pub threshold: Option<Rational>,
}

/// Parses an instance over `gamma`. A summand is `{"relation", "args"}` or a
/// row `[relation, args...]`. Variables not listed are added in order of use.
pub fn instance_from_json(text: &str, gamma: &ValuedStructure) -> Result<InstanceDocument> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let mut expr = TauExpression::new(file.variables.map(names).unwrap_or_default());
    for s in file.summands {
        let (relation, args) = match s {
            Summand::Object { relation, args } => (relation, names(args)),
            Summand::Row(row) => {
                let mut row = names(row).into_iter();
                let rel = row.next().ok_or_else(|| Error::Format("empty summand row".into()))?;
                (rel, row.collect())
            }
        };
        let rel: RelRef = gamma
            .symbol(&relation)
            .ok_or_else(|| Error::UnknownRelation(relation.clone()))?;
        let arity = gamma.arity_of(rel);
        if args.len() != arity {
            return Err(Error::Arity {
                relation,
                found: args.len(),
                tuple: args,
                expected: arity,
            });
        }
        let vars = args
            .iter()
            .map(|v| expr.var_index(v).unwrap_or_else(|| expr.add_variable(v.clone())))
            .collect();
        expr.push(rel, vars);
    }
    let threshold = match file.threshold {
        None => None,
        Some(CostValue::Int(v)) => Some(Rational::from_integer(v.into())),
        Some(CostValue::Text(s)) => Some(parse_rational(&s)?),
    };
    Ok(InstanceDocument { expr, threshold })
}
