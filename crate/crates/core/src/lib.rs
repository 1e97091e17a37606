//! Numerical laboratory for the semilinear wave equation with scale-invariant
//! damping `v_tt - Δv + 2/(1+t) v_t = |v|^p`: critical exponents, Liouville
//! type transformations, a closed-form radial linear solver, a Duhamel/Picard
//! global solver with weighted-norm diagnostics, and blow-up detection.

// `!(x > 0.0)` is used on purpose so that NaN fails the checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod duhamel;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod harness;
pub mod quadrature;
pub mod radial_linear;
pub mod transforms;

pub use error::{Error, Result};
