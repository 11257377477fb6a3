//! Bag databases as JSON documents or as one CSV file per relation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Map, Value};
use vcspkit_core::query::Signature;
use vcspkit_core::resilience::BagDatabase;

use crate::error::{read_file, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatabaseFormat {
    Json,
    Csv,
}

impl DatabaseFormat {
    /// A directory or a `.csv` file is CSV; anything else is JSON.
    pub fn detect(path: &Path) -> DatabaseFormat {
        let csv_ext = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if path.is_dir() || csv_ext {
            DatabaseFormat::Csv
        } else {
            DatabaseFormat::Json
        }
    }
}

/// An element name; plain numbers are accepted and read as their decimal text.
#[derive(Deserialize)]
#[serde(untagged)]
pub(crate) enum Name {
    Text(String),
    Number(i64),
}

impl Name {
    pub(crate) fn into_string(self) -> String {
        match self {
            Name::Text(s) => s,
            Name::Number(n) => n.to_string(),
        }
    }
}

pub(crate) fn names(v: Vec<Name>) -> Vec<String> {
    v.into_iter().map(Name::into_string).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Counted(Vec<Name>, i64),
    Plain(Vec<Name>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatabaseFile {
    #[serde(default)]
    elements: Option<Vec<Name>>,
    #[serde(default)]
    arities: BTreeMap<String, usize>,
    #[serde(default)]
    relations: Map<String, Value>,
    #[serde(default)]
    exogenous: Vec<String>,
    #[serde(default)]
    exogenous_tuples: Map<String, Value>,
}

struct RelationRows {
    name: String,
    arity: Option<usize>,
    rows: Vec<(Vec<String>, i64)>,
}

/// Rows collected from a file before they are checked and stored.
#[derive(Default)]
pub struct DatabaseBuilder {
    elements: Option<Vec<String>>,
    relations: Vec<RelationRows>,
    exogenous: Vec<String>,
    exogenous_tuples: Vec<(String, Vec<String>)>,
}

impl DatabaseBuilder {
    pub fn new() -> DatabaseBuilder {
        DatabaseBuilder::default()
    }

    /// Fixes the domain; tuples over other elements are then rejected.
    pub fn elements(&mut self, elements: Vec<String>) -> &mut Self {
        self.elements = Some(elements);
        self
    }

    fn relation_mut(&mut self, name: &str) -> &mut RelationRows {
        let i = match self.relations.iter().position(|r| r.name == name) {
            Some(i) => i,
            None => {
                self.relations.push(RelationRows {
                    name: name.to_string(),
                    arity: None,
                    rows: Vec::new(),
                });
                self.relations.len() - 1
            }
        };
        &mut self.relations[i]
    }

    pub fn declare(&mut self, name: &str, arity: usize) -> &mut Self {
        self.relation_mut(name).arity = Some(arity);
        self
    }

    /// Repeated rows accumulate.
    pub fn row(&mut self, name: &str, tuple: Vec<String>, mult: i64) -> &mut Self {
        self.relation_mut(name).rows.push((tuple, mult));
        self
    }

    pub fn exogenous(&mut self, name: &str) -> &mut Self {
        self.exogenous.push(name.to_string());
        self
    }

    pub fn exogenous_tuple(&mut self, name: &str, tuple: Vec<String>) -> &mut Self {
        self.exogenous_tuples.push((name.to_string(), tuple));
        self
    }

    pub fn build(&self) -> Result<BagDatabase> {
        let mut sig = Signature::new();
        for r in &self.relations {
            let arity = match (r.arity, r.rows.first()) {
                (Some(a), _) => a,
                (None, Some((t, _))) => t.len(),
                // Nothing says how wide an undeclared empty relation is; absent
                // relations are empty anyway.
                (None, None) => continue,
            };
            sig.add(&r.name, arity)?;
        }
        let fixed = self.elements.is_some();
        let mut db = BagDatabase::new(sig.clone(), self.elements.clone().unwrap_or_default());
        let resolve = |db: &mut BagDatabase, name: &str, arity: usize, tuple: &[String]| -> Result<Vec<usize>> {
            if tuple.len() != arity {
                return Err(Error::Arity {
                    relation: name.to_string(),
                    tuple: tuple.to_vec(),
                    expected: arity,
                    found: tuple.len(),
                });
            }
            tuple
                .iter()
                .map(|e| match db.element_index(e) {
                    Some(i) => Ok(i),
                    None if fixed => Err(Error::UnknownElement(e.clone())),
                    None => Ok(db.ensure_element(e)),
                })
                .collect()
        };
        for r in &self.relations {
            let Some(rel) = sig.index_of(&r.name) else { continue };
            for (tuple, mult) in &r.rows {
                if *mult <= 0 {
                    return Err(Error::Multiplicity {
                        relation: r.name.clone(),
                        tuple: tuple.clone(),
                        mult: *mult,
                    });
                }
                let t = resolve(&mut db, &r.name, sig.arity(rel), tuple)?;
                db.add(rel, t, *mult as u64)?;
            }
        }
        let known = |name: &str| self.relations.iter().any(|r| r.name == name);
        for name in &self.exogenous {
            match sig.index_of(name) {
                Some(rel) => db.set_exogenous(rel, true),
                None if known(name) => {}
                None => return Err(Error::UnknownRelation(name.clone())),
            }
        }
        for (name, tuple) in &self.exogenous_tuples {
            let rel = sig.index_of(name).ok_or_else(|| Error::UnknownRelation(name.clone()))?;
            let t = resolve(&mut db, name, sig.arity(rel), tuple)?;
            db.mark_exogenous_tuple(rel, t)?;
        }
        Ok(db)
    }
}

/// Parses the JSON database document.
pub fn database_from_json(text: &str) -> Result<BagDatabase> {
    let file: DatabaseFile = serde_json::from_str(text)?;
    let mut b = DatabaseBuilder::new();
    if let Some(e) = file.elements {
        b.elements(names(e));
    }
    for (name, rows) in file.relations {
        let rows: Vec<Entry> = serde_json::from_value(rows)
            .map_err(|e| Error::Format(format!("relation `{name}`: expected [[tuple], multiplicity] entries: {e}")))?;
        b.relation_mut(&name);
        for row in rows {
            match row {
                Entry::Counted(t, m) => b.row(&name, names(t), m),
                Entry::Plain(t) => b.row(&name, names(t), 1),
            };
        }
    }
    for (name, arity) in file.arities {
        b.declare(&name, arity);
    }
    for name in file.exogenous {
        b.exogenous(&name);
    }
    for (name, tuples) in file.exogenous_tuples {
        let tuples: Vec<Vec<Name>> = serde_json::from_value(tuples)
            .map_err(|e| Error::Format(format!("exogenous tuples of `{name}`: expected a list of tuples: {e}")))?;
        for t in tuples {
            b.exogenous_tuple(&name, names(t));
        }
    }
    b.build()
}

pub fn database_to_json(db: &BagDatabase) -> Value {
    let sig = db.signature();
    let el = |t: &[usize]| -> Vec<&str> { t.iter().map(|&i| db.elements()[i].as_str()).collect() };
    let mut relations = Map::new();
    let mut arities = Map::new();
    let mut exo_tuples = Map::new();
    for rel in 0..sig.len() {
        let name = sig.name(rel).to_string();
        let rows: Vec<Value> = db.tuples(rel).iter().map(|(t, m)| json!([el(t), m])).collect();
        if rows.is_empty() {
            arities.insert(name.clone(), json!(sig.arity(rel)));
        }
        relations.insert(name.clone(), Value::Array(rows));
        if !db.is_exogenous_relation(rel) {
            let exo: Vec<Value> = db
                .tuples(rel)
                .keys()
                .filter(|t| db.is_exogenous(rel, t))
                .map(|t| json!(el(t)))
                .collect();
            if !exo.is_empty() {
                exo_tuples.insert(name, Value::Array(exo));
            }
        }
    }
    let exogenous: Vec<&str> = db.exogenous_relations().into_iter().map(|r| sig.name(r)).collect();
    let mut out = Map::new();
    out.insert("elements".into(), json!(db.elements()));
    if !arities.is_empty() {
        out.insert("arities".into(), Value::Object(arities));
    }
    out.insert("relations".into(), Value::Object(relations));
    out.insert("exogenous".into(), json!(exogenous));
    out.insert("exogenous_tuples".into(), Value::Object(exo_tuples));
    Value::Object(out)
}

/// Reads one relation from CSV text. The header names the columns; a column
/// called `mult` holds multiplicities and every other column is a position.
pub fn read_csv_relation<R: std::io::Read>(b: &mut DatabaseBuilder, name: &str, input: R) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    let mult_col = header.iter().position(|h| h.eq_ignore_ascii_case("mult"));
    b.declare(name, header.len() - usize::from(mult_col.is_some()));
    for record in reader.records() {
        let record = record?;
        let mut tuple = Vec::new();
        let mut mult = 1;
        for (i, field) in record.iter().enumerate() {
            if Some(i) == mult_col {
                mult = field
                    .parse()
                    .map_err(|_| Error::Format(format!("relation `{name}`: multiplicity `{field}` is not an integer")))?;
            } else {
                tuple.push(field.to_string());
            }
        }
        b.row(name, tuple, mult);
    }
    Ok(())
}

/// CSV files of a directory, sorted; a single file is returned as is.
pub fn csv_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// One relation per file, named by the file stem.
pub fn database_from_csv_files(files: &[PathBuf]) -> Result<BagDatabase> {
    let mut b = DatabaseBuilder::new();
    for f in files {
        let name = f
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Format(format!("{}: no relation name in the file name", f.display())))?;
        let text = read_file(f)?;
        read_csv_relation(&mut b, name, text.as_bytes())?;
    }
    b.build()
}

pub fn load_bag_database(path: &Path, format: DatabaseFormat) -> Result<BagDatabase> {
    match format {
        DatabaseFormat::Json => database_from_json(&read_file(path)?),
        DatabaseFormat::Csv => database_from_csv_files(&csv_files(path)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counted_entries_set_multiplicity() {
        let db = database_from_json(r#"{"relations":{"R":[[["a","b"],3]]}}"#).unwrap();
        assert_eq!(db.multiplicity(0, &[0, 1]), 3);
        assert_eq!(db.elements(), ["a", "b"]);
    }

    #[test]
    fn repeated_rows_accumulate() {
        let mut b = DatabaseBuilder::new();
        read_csv_relation(&mut b, "R", "x,y\na,b\na,b\nb,c\n".as_bytes()).unwrap();
        let db = b.build().unwrap();
        assert_eq!(db.multiplicity(0, &[0, 1]), 2);
        assert_eq!(db.multiplicity(0, &[1, 2]), 1);
    }

    #[test]
    fn csv_mult_column() {
        let mut b = DatabaseBuilder::new();
        read_csv_relation(&mut b, "S", "mult,from,to\n4,a,b\n".as_bytes()).unwrap();
        let db = b.build().unwrap();
        assert_eq!(db.signature().arity(0), 2);
        assert_eq!(db.multiplicity(0, &[0, 1]), 4);
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let err = database_from_json(r#"{"relations":{"R":[[["a","b"],1],[["a"],1]]}}"#).unwrap_err();
        assert!(matches!(err, Error::Arity { expected: 2, found: 1, .. }), "{err}");
        let err = database_from_json(r#"{"arities":{"R":3},"relations":{"R":[["a","b"]]}}"#).unwrap_err();
        assert!(matches!(err, Error::Arity { expected: 3, .. }), "{err}");
    }

    #[test]
    fn non_positive_multiplicity_is_rejected() {
        let err = database_from_json(r#"{"relations":{"R":[[["a","b"],0]]}}"#).unwrap_err();
        assert!(matches!(err, Error::Multiplicity { mult: 0, .. }));
        let mut b = DatabaseBuilder::new();
        read_csv_relation(&mut b, "R", "a,mult\nx,-2\n".as_bytes()).unwrap();
        assert!(matches!(b.build(), Err(Error::Multiplicity { mult: -2, .. })));
    }

    #[test]
    fn unknown_names_are_rejected() {
        let err = database_from_json(r#"{"relations":{"R":[["a","b"]]},"exogenous":["T"]}"#).unwrap_err();
        assert!(matches!(err, Error::UnknownRelation(ref n) if n == "T"));
        let err = database_from_json(r#"{"relations":{"R":[["a","b"]]},"exogenous_tuples":{"S":[["a"]]}}"#)
            .unwrap_err();
        assert!(matches!(err, Error::UnknownRelation(ref n) if n == "S"));
        let err = database_from_json(r#"{"elements":["a"],"relations":{"R":[["a","b"]]}}"#).unwrap_err();
        assert!(matches!(err, Error::UnknownElement(ref n) if n == "b"));
        assert!(database_from_json(r#"{"relation":{}}"#).is_err());
    }

    #[test]
    fn exogeneity_is_read() {
        let text = r#"{
            "elements": ["a", "b", "c", "d"],
            "relations": {"R": [[["a","b"],2], [["c","d"],1]], "S": [["b","c"]]},
            "exogenous": ["S"],
            "exogenous_tuples": {"R": [["c","d"]]}
        }"#;
        let db = database_from_json(text).unwrap();
        assert!(db.is_exogenous_relation(1));
        assert!(db.is_exogenous(0, &[2, 3]));
        assert!(!db.is_exogenous(0, &[0, 1]));
        assert_eq!(db.endogenous_weight(), 2);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "elements": ["a", "b", "c", "d", "e"],
            "arities": {"T": 3},
            "relations": {"R": [[["a","b"],2], [["c","d"],1]], "S": [[["b","c"],5]], "T": []},
            "exogenous": ["S"],
            "exogenous_tuples": {"R": [["c","d"]]}
        }"#;
        let db = database_from_json(text).unwrap();
        let again = database_from_json(&database_to_json(&db).to_string()).unwrap();
        assert_eq!(db, again);
        assert_eq!(db.signature().arity(2), 3);
    }

    #[test]
    fn empty_undeclared_relations_are_dropped() {
        let db = database_from_json(r#"{"relations":{"R":[],"S":[["a"]]},"exogenous":["R"]}"#).unwrap();
        assert_eq!(db.signature().len(), 1);
        assert_eq!(db.signature().name(0), "S");
    }

    #[test]
    fn numeric_element_names() {
        let db = database_from_json(r#"{"relations":{"R":[[[0,1],2]]}}"#).unwrap();
        assert_eq!(db.elements(), ["0", "1"]);
    }

    #[test]
    fn csv_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("R.csv"), "x,y\na,b\n").unwrap();
        std::fs::write(dir.path().join("S.csv"), "x,y,mult\nb,c,3\n").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        assert_eq!(DatabaseFormat::detect(dir.path()), DatabaseFormat::Csv);
        let db = load_bag_database(dir.path(), DatabaseFormat::Csv).unwrap();
        assert_eq!(db.signature().len(), 2);
        assert_eq!(db.multiplicity(1, &[1, 2]), 3);
    }
}
