//! The shipped model on which the triangle gadget is checked.

use vcspkit_core::query::RelationalStructure;

use crate::structure::structure_from_json;

pub const TRIANGLE_WITNESS_JSON: &str = include_str!("../data/triangle_witness.json");

pub fn triangle_witness_model() -> RelationalStructure {
    structure_from_json(TRIANGLE_WITNESS_JSON).expect("the shipped witness model parses")
}
