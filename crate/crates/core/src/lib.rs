//! Measurement semantics for finite-dimensional quantum systems.
//!
//! The crate models the two historical forms of the projection postulate
//! (von Neumann's refinement-mediated form and the now-standard projection
//! onto the eigenspace), runs them side by side on composite
//! systems, computes CHSH correlations, and simulates time-window
//! coincidence matching of detector clicks.

pub mod bell;
pub mod coincidence;
pub mod composite;
pub mod error;
pub mod measurement;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{CMatrix, CVector, HermitianOperator, OrthonormalBasisFamily, SpectralDecomposition};
