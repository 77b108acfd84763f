use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e}, max eigenvalue {max_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64, max_eigenvalue: f64 },

    #[error("basis is rank deficient (smallest singular value {smallest:e}, largest {largest:e})")]
    RankDeficient { smallest: f64, largest: f64 },

    /// The maximized minimum eigenvalue of a pencil stayed below `-tol`.
    #[error("pencil is infeasible: best minimum eigenvalue {best_min_eig:e} at alpha = {best_alpha}")]
    Infeasible { best_alpha: f64, best_min_eig: f64 },

    #[error("sandwich hypothesis violated on the {side} side: best minimum eigenvalue {best_min_eig:e} at {best_alpha}")]
    HypothesisViolated {
        side: &'static str,
        best_alpha: f64,
        best_min_eig: f64,
    },

    /// Every vector of `M₁ ∩ M₂` lies (numerically) in the hyperplane.
    #[error("degenerate z: |phi(z)| = {phi_z:e}; zero eigenvalues in splits: T1 {zeros_t1}, T2 {zeros_t2}")]
    DegenerateZ {
        phi_z: f64,
        zeros_t1: usize,
        zeros_t2: usize,
    },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Infeasible { .. } => "infeasible",
            Error::HypothesisViolated { .. } => "hypothesis_violated",
            Error::DegenerateZ { .. } => "degenerate_z",
            Error::VerificationFailed(_) => "verification_failed",
            Error::Internal(_) => "internal",
        }
    }

    /// Process exit code used by the CLI: 1 bad input, 2 failed check, 3 degenerate z.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::RankDeficient { .. } => 1,
            Error::DegenerateZ { .. } => 3,
            Error::Infeasible { .. }
            | Error::HypothesisViolated { .. }
            | Error::VerificationFailed(_)
            | Error::Internal(_) => 2,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
