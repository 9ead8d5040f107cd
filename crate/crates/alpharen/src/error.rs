use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph error: {0}")]
    Graph(String),
    #[error("diagram is not connected")]
    Disconnected,
    #[error("diagram is not one-particle irreducible")]
    NotOnePi,
    #[error("subgraph error: {0}")]
    Subgraph(String),
    #[error("laurent window is empty")]
    EmptyWindow,
    #[error("laurent fit residual {residual:e} exceeds tolerance {tol:e}")]
    IllConditionedFit { residual: f64, tol: f64 },
    #[error("non-positive alpha parameter")]
    NonPositiveAlpha,
    #[error("singular momentum network: {0}")]
    SingularNetwork(String),
    #[error("vertex operator degree {0} exceeds the supported moment order")]
    DegreeCap(usize),
    #[error("quadrature failure in {where_}: {detail}")]
    Quadrature { where_: String, detail: String },
    #[error("regulator sample too close to an integration pole: {0}")]
    PoleProximity(String),
    #[error("analytic continuation not supported here: {0}")]
    UnsupportedContinuation(String),
    #[error("counterterm with delta-derivative terms cannot be inserted as a subdiagram: {0}")]
    UnsupportedSubdivergence(String),
    #[error("counterterm homogeneity violation: {0}")]
    HomogeneityViolation(String),
    #[error("finite-difference stencil did not converge: {0}")]
    StencilNonConverging(String),
    #[error("parameter constraint violated: {0}")]
    ParamConstraint(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
