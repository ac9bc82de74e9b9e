//! Separability certificates for bipartite positive semidefinite Hermitian
//! matrices.
//!
//! The crate decides separability constructively where the underlying theory
//! allows it: it computes Hermitian Schmidt decompositions, tests the PPT and
//! SPC properties, splits SPC/PPT matrices into weak irreducible blocks,
//! produces explicit separable decompositions for tensor rank at most two, and
//! evaluates the sharp SPC/PPT separability inequalities with explicit
//! witnesses. Entanglement is certified through negative partial-transpose
//! eigenvectors. Everything else is reported as inconclusive rather than
//! guessed.
//!
//! The main entry point is [`separate::certify`]; the layers below it
//! ([`matrix`], [`star`], [`schmidt`], [`classify`], [`split`]) are exposed
//! because they are useful on their own.

pub mod classify;
pub mod error;
pub mod families;
pub mod matrix;
pub mod schmidt;
pub mod separate;
pub mod split;
pub mod star;

pub use error::{Error, Result};
pub use matrix::{BipartiteOperator, CMatrix, EigenSystem, HermitianMatrix, ToleranceConfig, C64};
