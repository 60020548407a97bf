use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian: max deviation {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("eigenvalue tolerance {eig_tol:.3e} merged all branches but reconstruction error {recon_err:.3e} exceeds the budget")]
    ToleranceCollapse { eig_tol: f64, recon_err: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("branch probability {prob:.3e} is below the probability floor; cannot condition on it")]
    ZeroProbabilityBranch { prob: f64 },

    #[error("refinement basis does not block-diagonalize per eigenspace (group {group}, max leakage {leakage:.3e})")]
    RefinementMismatch { group: usize, leakage: f64 },

    #[error("refinement basis does not span the full space ({provided} vectors for dimension {dim})")]
    IncompleteBasis { provided: usize, dim: usize },

    #[error("refinement labels are not pairwise distinct (values {a} and {b})")]
    DuplicateLabels { a: f64, b: f64 },

    #[error("observables do not commute: commutator max-norm {norm:.3e} exceeds tolerance {tol:.3e}")]
    NonCommutingObservables { norm: f64, tol: f64 },

    #[error("coefficients are not normalized: squared norm {norm_sq} deviates from 1")]
    NotNormalized { norm_sq: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("entangled-state indices must differ (both were {index})")]
    EqualIndices { index: usize },

    #[error("empty sample for setting {setting}")]
    EmptySample { setting: usize },

    #[error("spin direction has norm {norm}, expected a unit vector")]
    NonUnitDirection { norm: f64 },

    #[error("local observable on side {side} has a degenerate spectrum; a nondegenerate eigenbasis is required")]
    DegenerateLocalObservable { side: u8 },

    #[error("invalid delay model parameters: {reason}")]
    InvalidModelParams { reason: String },

    #[error("state vector is not normalized: norm {norm}")]
    StateNotNormalized { norm: f64 },

    #[error("density matrix invalid: {reason}")]
    InvalidDensity { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
