use thiserror::Error;

/// Errors raised by the numerical core and the model layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("{algorithm} did not converge after {iterations} iterations (max residual {max_residual:e})")]
    NoConvergence {
        algorithm: &'static str,
        iterations: usize,
        max_residual: f64,
    },
    #[error("matrix exponential overflowed (1-norm {norm:e})")]
    Overflow { norm: f64 },
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("inconsistent Jordan chain: {0}")]
    ChainInconsistent(String),
    #[error("biorthogonal norm |C| = {value:e} below tolerance {tol:e}")]
    ZeroBiorthogonalNorm { value: f64, tol: f64 },
    #[error("closure residual {residual:e} exceeds tolerance {tol:e}")]
    ClosureFailure { residual: f64, tol: f64 },
    #[error("ambiguous left/right pairing: best overlaps {best:e} and {second:e}")]
    AmbiguousPairing { best: f64, second: f64 },
    #[error("ambiguous eigenvalue pairing between H and its adjoint: {0}")]
    PairingAmbiguity(String),
    #[error("spectrum is not real (max |Im E| = {max_imag:e})")]
    ComplexSpectrum { max_imag: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("density matrix is not Hermitian positive semidefinite: {0}")]
    NotPsd(String),
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
