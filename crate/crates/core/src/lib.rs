// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod embedding;
pub mod error;
pub mod heuristics;
pub mod isometry;
pub mod pipeline;
pub mod rng;
pub mod runner;

pub use error::{Error, Result};
