//! Checkable gadgets: the not-all-equal expression over `<`, the triangle
//! gadget whose optimal assignments encode one-in-three, and the product
//! construction of two polymorphism halves for the loop query.

mod loop_product;
mod strip;
mod triangle;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::cost::Cost;
use crate::presets;
use crate::query::QueryError;
use crate::vcsp::{apply_clone_operator, express, CloneOp, RelRef, TauExpression, VcspError};

pub use loop_product::{
    build_loop_product, check_loop_preconditions, loop_models, loop_reference_model, verify_loop_product,
    LoopProduct,
};
pub use triangle::{
    build_witness_model, triangle_gadget_expression, triangle_gadget_structure, verify_triangle_gadget,
    GADGET_MINIMUM, ONE_PAIR, ZERO_PAIR,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GadgetError {
    #[error(transparent)]
    Vcsp(#[from] VcspError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("the model has no relation `{name}` of arity {arity}")]
    MissingRelation { name: String, arity: usize },
    #[error("cost {0} is not a small non-negative integer")]
    NonIntegralCost(String),
    #[error("atom on variables {0} and {1} is not local to a strip of triangles")]
    NotAStrip(usize, usize),
    #[error("model fails a precondition: {0}")]
    Precondition(String),
}

/// One checked statement. A failing claim carries a concrete witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub name: String,
    pub counterexample: Option<String>,
}

impl Claim {
    pub fn check(name: &str, counterexample: Option<String>) -> Claim {
        Claim {
            name: name.to_string(),
            counterexample,
        }
    }

    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetReport {
    pub gadget: String,
    pub claims: Vec<Claim>,
}

impl GadgetReport {
    pub fn new(gadget: &str) -> GadgetReport {
        GadgetReport {
            gadget: gadget.to_string(),
            claims: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, counterexample: Option<String>) {
        self.claims.push(Claim::check(name, counterexample));
    }

    pub fn passed(&self) -> bool {
        self.claims.iter().all(Claim::holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(|c| !c.holds())
    }

    pub fn claim(&self, name: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for GadgetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.gadget, if self.passed() { "pass" } else { "FAIL" })?;
        for c in &self.claims {
            match &c.counterexample {
                None => writeln!(f, "  ok   {}", c.name)?,
                Some(w) => writeln!(f, "  FAIL {}: {}", c.name, w)?,
            }
        }
        Ok(())
    }
}

/// `<(x,y) + <(y,z) + <(z,x)` over the strict order on {0,1}.
pub fn nae_gadget_expression() -> TauExpression {
    let mut e = TauExpression::new(["x", "y", "z"].iter().map(|s| s.to_string()).collect());
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        e.push(RelRef::Symbol(0), alloc::vec![a, b]);
    }
    e
}

/// Checks that the optimal triples of the cyclic `<` sum are exactly the
/// not-all-equal triples.
pub fn verify_nae_gadget() -> Result<GadgetReport, GadgetError> {
    let gamma = presets::gamma_lt();
    let sum = express(&gamma, &nae_gadget_expression(), &[0, 1, 2])?;
    let opt = apply_clone_operator(&CloneOp::Opt, &sum)?;
    let target = presets::nae();
    let show = |t: &[usize]| format!("({},{},{})", t[0], t[1], t[2]);
    let mut report = GadgetReport::new("nae");

    let mismatch = (0..opt.len()).find(|&i| opt.at(i) != target.at(i)).map(|i| {
        let t = opt.tuple(i);
        format!("{}: optimal relation gives {}, expected {}", show(&t), opt.at(i), target.at(i))
    });
    report.push("optimal triples are the not-all-equal triples", mismatch);

    let sum_mismatch = (0..sum.len()).find_map(|i| {
        let t = sum.tuple(i);
        let want = if t[0] == t[1] && t[1] == t[2] { 3 } else { 2 };
        (*sum.at(i) != Cost::int(want)).then(|| format!("{}: sum is {}, expected {}", show(&t), sum.at(i), want))
    });
    report.push("sum is 2 on mixed triples and 3 on constant ones", sum_mismatch);
    Ok(report)
}
