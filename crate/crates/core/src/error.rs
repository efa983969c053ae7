use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("circulant embedding has negative eigenvalue {value:e} at index {index}")]
    NegativeEmbedding { index: usize, value: f64 },

    #[error("discretized operator is not Hermitian (max relative asymmetry {0:e})")]
    NonHermitian(f64),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("density inversion produced {value:e} at x = {x}; inversion parameters inadequate")]
    NegativeDensity { x: f64, value: f64 },

    /// Identical seeds produced different values.
    #[error("common random numbers violated: {0}")]
    Reproducibility(String),

    #[error("epsilon {eps} is below the resolution floor {floor} (kappa * dt^(2H))")]
    BelowResolutionFloor { eps: f64, floor: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of a numerical method rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NegativeEmbedding { .. }
                | Error::NonHermitian(_)
                | Error::Eigen(_)
                | Error::NegativeDensity { .. }
                | Error::Reproducibility(_)
        )
    }
}
