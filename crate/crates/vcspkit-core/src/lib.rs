//! Exact valued constraint satisfaction and database resilience.
//!
//! The crate is `no_std` and needs only `alloc`. File formats and the command
//! line live in the companion `vcspkit` crate.

#![no_std]
// Numeric kernels index several arrays in step.
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cost;
pub mod fractional;
pub mod gadgets;
pub mod lp;
pub mod orbit;
pub mod presets;
pub mod query;
pub mod resilience;
pub mod rpq;
pub mod solve;
pub mod vcsp;

pub use cost::{Cost, Rational};
