//! Numerical machinery for bilinear Bochner–Riesz means.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod bump;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod kernels;
pub mod multiplier;
pub mod operators;
pub mod probe;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
pub use exponents::{classify_region, Exponent, ExponentTriple, Regime, RegionVerdict};
pub use grid::{Grid, SampledField, Space};
