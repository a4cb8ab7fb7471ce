use thiserror::Error;

/// Errors raised by the reconstruction, decomposition and quadrature pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An analytic field was evaluated at a point where it is not defined.
    #[error("singular point at {point:?}: {detail}")]
    SingularPoint { point: Vec<f64>, detail: String },

    /// Newton search for a zero-level-set root did not converge.
    #[error("root search failed: {0}")]
    RootSearchFailed(String),

    /// The level-set gradient vanished where a tangent or direction was needed.
    #[error("degenerate level-set gradient: {0}")]
    DegenerateGradient(String),

    /// A sub-element has a non-positive Jacobian determinant.
    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    /// Recursive refinement hit the depth limit without producing valid leaves.
    #[error("refinement exhausted in element {element} at depth {depth}: {reason}")]
    RefinementExhausted {
        element: usize,
        depth: usize,
        reason: String,
    },

    /// A mapped quadrature point has a non-positive measure factor.
    #[error("integration invalid: {0}")]
    IntegrationInvalid(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("internal consistency error: {0}")]
    InternalConsistency(String),
}

impl Error {
    /// Failures that are resolved by recursively refining the element.
    pub fn triggers_refinement(&self) -> bool {
        matches!(
            self,
            Error::RootSearchFailed(_) | Error::DegenerateGradient(_) | Error::DecompositionFailed(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
