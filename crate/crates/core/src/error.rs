use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular: smallest singular value {sigma:e}")]
    SingularInput { sigma: f64 },
    #[error("near-degenerate value {value:e} at tolerance {tol:e}; retry in exact mode")]
    NearDegenerate { value: f64, tol: f64 },
    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,
    #[error("matrix is not symplectic: residual {residual:e}")]
    NotSymplectic { residual: f64 },
    #[error("unit-circle eigenvalue {angle} is not semisimple")]
    DefectiveOnCircle { angle: f64 },
    #[error("eigenvalues cannot be separated at cluster tolerance {tol:e}")]
    AmbiguousCluster { tol: f64 },
    #[error("unitary eigen-angle {angle} is within 1e-6 of pi")]
    BranchAmbiguity { angle: f64 },
    #[error("path winding needs more than {limit} segments")]
    SubdivisionLimit { limit: usize },
    #[error("homogenization defect ratio {ratio} too large at depth {depth}")]
    SnapFailure { ratio: f64, depth: u32 },
    #[error("fixed Lagrangian search is inconclusive: {0}")]
    Inconclusive(String),
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("surface relator is violated: residual {residual:e}")]
    RelatorViolated { residual: f64 },
    #[error("Milnor-Wood bound violated: |{value}| > {bound}")]
    BoundViolated { value: f64, bound: f64 },
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("representation is not in Hom^S: {0}")]
    MembershipFailed(String),
    #[error("unrealizable hyperbolic data: {0}")]
    Unrealizable(String),
    #[error("representations are on different surfaces")]
    MismatchedSurfaces,
    #[error("sides disagree on the cut curve image: residual {residual:e}")]
    GluingMismatch { residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures caused by the caller's data rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotSymplectic { .. }
                | Error::UnknownGenerator(_)
                | Error::RelatorViolated { .. }
                | Error::InvalidCut(_)
                | Error::MembershipFailed(_)
                | Error::Unrealizable(_)
                | Error::MismatchedSurfaces
                | Error::DimensionMismatch(_)
                | Error::InvalidInput(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
