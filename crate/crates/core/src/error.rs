use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("{what} exceeds the configured cap of {cap}")]
    CapExceeded { what: &'static str, cap: usize },
    #[error("x and y coincide")]
    Coincident,
    #[error("point lies on the cut locus: {0}")]
    OnCutLocus(String),
    #[error("epsilon {epsilon} exceeds the admissible margin {margin} ({which})")]
    EpsilonTooLarge {
        epsilon: f64,
        margin: f64,
        which: &'static str,
    },
    #[error("quadrature not resolved: {0}")]
    Quadrature(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate Newton diagram: {0}")]
    Diagram(String),
    #[error("direction is not in P: {0}")]
    NotPrincipal(String),
    #[error("not a hypersurface cut point: {0}")]
    NotHypersurface(String),
    #[error("internal fault: {0}")]
    InternalFault(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
