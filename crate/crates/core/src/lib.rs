//! Numerical geometry of hypersurfaces in product spaces `M × ℝ` and space
//! forms: pointwise frames, differential identities, integral formulas and
//! prescribed-curvature graphs.

// Negated float comparisons deliberately treat NaN as out of range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod ambient;
pub mod calculus;
pub mod cli;
pub mod domain;
pub mod error;
pub mod graphs;
pub mod identities;
pub mod integral;
pub mod report;
pub mod shape;
pub mod sphere;
pub mod zoo;

pub use error::{Error, Result};
