use thiserror::Error;

/// Errors raised by the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index set would exceed the member limit of {limit}")]
    Capacity { limit: usize },

    #[error(
        "only {found} of the required {required} nodes within radius {radius:.4e} of node {reference} after {expansions} expansions"
    )]
    InsufficientNodes {
        reference: usize,
        found: usize,
        required: usize,
        radius: f64,
        expansions: usize,
    },

    #[error("local system at node {reference} is singular (condition estimate {condition:.3e})")]
    SingularStencil { reference: usize, condition: f64 },

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("every node has a near-zero exact solution; relative error is undefined")]
    AllExcluded,

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
