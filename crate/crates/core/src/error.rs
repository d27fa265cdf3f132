use thiserror::Error;

#[derive(Debug, Error)]
pub enum DgError {
    #[error("mesh needs at least one element per side")]
    EmptyMesh,

    #[error("polynomial degree {0} is outside the supported range 1..=8")]
    UnsupportedDegree(usize),

    #[error("quadrature needs at least one point per direction")]
    InvalidQuadrature,

    #[error("point ({0}, {1}) lies outside the reference element")]
    OutsideReference(f64, f64),

    #[error("face {index} does not belong to this mesh")]
    FaceMismatch { index: usize },

    #[error("face {0} has zero length")]
    DegenerateFace(usize),

    #[error("coefficient K = {value} is not positive at ({x}, {y}) in element {element}")]
    NonPositiveCoefficient {
        element: usize,
        x: f64,
        y: f64,
        value: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("system has {dofs} degrees of freedom, above the cap of {cap}")]
    TooManyDofs { dofs: usize, cap: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("GMRES did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("GMRES breakdown at iteration {0}")]
    Breakdown(usize),

    #[error("relative residual {residual:e} above tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("norm Gram matrix is not positive definite")]
    NormNotPositiveDefinite,

    #[error("eigen-solver failure: {0}")]
    EigenFailure(String),

    #[error("dense path supports at most {cap} dofs, got {dofs}")]
    DenseTooLarge { dofs: usize, cap: usize },

    #[error("p={p} n={n}: {source}")]
    AtLevel {
        p: usize,
        n: usize,
        source: Box<DgError>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl DgError {
    /// Process exit code: 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            DgError::Config(_) => 2,
            DgError::AtLevel { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, DgError>;
