//! Rewriting theory in shuffle operads: tree monomials, presentations,
//! critical branchings and completion, overlapping polygraphic resolutions,
//! free-bimodule chain complexes, and minimality/Koszulness certificates.

pub mod error;
pub mod treemono;
pub mod linalg;
pub mod polygraph;
pub mod rewrite;
pub mod branching;
pub mod resolution;
pub mod fixtures;

pub use error::{Error, Result};
