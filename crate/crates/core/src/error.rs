use thiserror::Error;

/// Errors raised while constructing or checking the algebraic objects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e}, allowed {allowed:.3e})")]
    NotHermitian { asymmetry: f64, allowed: f64 },
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid group element: {0}")]
    InvalidElement(String),
    #[error("window is not closed under left translation by element {element}")]
    WindowNotClosed { element: usize },
    #[error("algebra does not contain a unit: {0}")]
    NotUnital(String),
    #[error("internal consistency failure: {0}")]
    InternalError(String),
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("field value at element {element} is not a central positive element: {reason}")]
    NotCentralPositive { element: usize, reason: String },
    #[error("field is not normalized: residual {residual:.3e}")]
    NotNormalized { residual: f64 },
    #[error("window is ambiguous: {0}")]
    AmbiguousWindow(String),
    #[error("incomplete certificate: {0}")]
    IncompleteCertificate(String),
    #[error("required structure is missing: {0}")]
    StructureMissing(String),
    #[error("state is not invariant under the action (residual {residual:.3e})")]
    NotInvariant { residual: f64 },
    #[error("map is not unital completely positive: {0}")]
    NotUcp(String),
    #[error("map is not completely positive: {0}")]
    NotCp(String),
    #[error("subspace is not a submodule: {0}")]
    NotSubmodule(String),
}

pub type Result<T> = std::result::Result<T, Error>;
