//! Exact branch and bound, the basic LP relaxation, and instance rewritings
//! that preserve the existence of a solution.

mod blp;
mod bnb;
mod pp;
mod rewrite;

pub use blp::{solve_blp, BlpResult};
pub use bnb::{solve_exact, Minimizer, OptResult};
pub use pp::reduce_pp_instance;
pub use rewrite::{rewrite_instance, Rewrite, RewriteError};

#[cfg(test)]
mod tests;
