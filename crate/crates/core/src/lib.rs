//! Exact-arithmetic workbench for Hecke operators over finite fields, zeta
//! rationality experiments, correspondences, and lattice models.

pub mod charsums;
pub mod dynamics;
pub mod error;
pub mod exactlin;
pub mod ff;
pub mod hecke;
pub mod lattice;
pub mod report;
pub mod spans;
pub mod zeta;

pub use error::{Error, Result};
pub use ff::{Field, FieldDesc, FieldElement};
pub use exactlin::{IntMatrix, PowerSeries, RatMatrix, RatPoly};
