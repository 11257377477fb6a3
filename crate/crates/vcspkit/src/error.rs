use std::path::PathBuf;

use vcspkit_core::cost::ParseRationalError;
use vcspkit_core::fractional::FractionalError;
use vcspkit_core::gadgets::GadgetError;
use vcspkit_core::lp::LpError;
use vcspkit_core::orbit::OrbitError;
use vcspkit_core::query::QueryError;
use vcspkit_core::resilience::ResilienceError;
use vcspkit_core::rpq::RpqError;
use vcspkit_core::vcsp::VcspError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("tuple {tuple:?} of `{relation}` has {found} entries, expected {expected}")]
    Arity {
        relation: String,
        tuple: Vec<String>,
        expected: usize,
        found: usize,
    },
    #[error("multiplicity {mult} of {tuple:?} in `{relation}` must be positive")]
    Multiplicity {
        relation: String,
        tuple: Vec<String>,
        mult: i64,
    },
    #[error(transparent)]
    Cost(#[from] ParseRationalError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Vcsp(#[from] VcspError),
    #[error(transparent)]
    Resilience(#[from] ResilienceError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Fractional(#[from] FractionalError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Rpq(#[from] RpqError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
