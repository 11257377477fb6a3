//! JSON and CSV formats and the command line for `vcspkit-core`.

pub mod commands;
pub mod db;
pub mod error;
pub mod structure;
pub mod witness;

pub use error::{Error, Result};
