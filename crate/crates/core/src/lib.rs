//! Left-invariant almost-Hermitian geometry on Lie algebras: connections,
//! Ricci-type curvatures, Einstein conditions and the almost-abelian reduction.

pub mod algebra;
pub mod almost_abelian;
pub mod connections;
pub mod curvatures;
pub mod error;
pub mod hermitian;
pub mod json;
pub mod presets;
pub mod tensor;
pub mod verifier;

pub use error::{Error, Result};

/// Absolute tolerance for checks on quantities of order one.
pub const EPS_ABS: f64 = 1e-9;
/// Relative tolerance, scaled by the magnitude of the terms being compared.
pub const EPS_REL: f64 = 1e-8;
