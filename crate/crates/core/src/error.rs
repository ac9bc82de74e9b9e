use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("input is not Hermitian (residual {residual:.3e}, tolerance {tol:.3e})")]
    NonHermitianInput { residual: f64, tol: f64 },

    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("input is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    InputNotPsd { min_eigenvalue: f64 },

    #[error("factor dimensions must be at least 2 (got {k}x{m})")]
    DimensionTooSmall { k: usize, m: usize },

    #[error("Schmidt decomposition is empty")]
    EmptyDecomposition,

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("matrix is neither SPC nor PPT")]
    NotSpcNorPpt,

    #[error("image of the shift direction is not contained in the image of gamma (residual {residual:.3e})")]
    ImageNotContained { residual: f64 },

    #[error("shift direction is a scalar multiple of gamma")]
    MultipleOfGamma,

    #[error("shift direction is zero")]
    ZeroB,

    #[error("tensor rank {rank} exceeds the supported bound {bound}")]
    TensorRankTooHigh { rank: usize, bound: usize },

    #[error("matrix is not a weak irreducible SPC matrix: {0}")]
    NotWeakIrreducibleSpc(String),

    #[error("matrix is not a weak irreducible PPT matrix: {0}")]
    NotWeakIrreduciblePpt(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
