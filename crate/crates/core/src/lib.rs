//! Exact moments of minors of Wishart matrices, Monte Carlo checks, and
//! standardized tests for vanishing minors of a sample covariance matrix.

pub mod cli;
pub mod constraints;
pub mod error;
pub mod general;
pub mod index;
pub mod matrix;
pub mod oracle;
pub mod rng;
pub mod standard;
pub mod wishart;

pub use error::{Error, Result};
pub use index::{IndexSeq, SubsetEnumeration};
pub use matrix::{CompoundMatrix, DenseMatrix, SymPDMatrix};
pub use rng::RngStream;
