use crate::spin::BlochVector;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("spin quantum number {0} is not a positive half-integer")]
    InvalidSpin(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("basis is not orthonormal and traceless (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("state is not pure (purity {0})")]
    NotPure(f64),

    #[error("operator or vector has zero norm")]
    ZeroNorm,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("positive-semidefinite projection did not converge after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        /// Best feasible iterate reached before the cap.
        best: BlochVector,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
