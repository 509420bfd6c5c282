use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Variants are grouped so that front ends can tell bad input (validation)
/// apart from numerical failures; see [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("resource limit: {what} would need {requested} simplices, cap is {cap}")]
    Resource {
        what: String,
        requested: usize,
        cap: usize,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed ({invariant}): {detail}")]
    Validation { invariant: String, detail: String },

    #[error("invalid parameter `{name}`: {detail}")]
    Parameter { name: String, detail: String },

    #[error("exterior derivative of a top-degree cochain (degree {degree} on a {dim}-complex)")]
    TopDegree { degree: usize, dim: usize },

    #[error("degree mismatch: {detail}")]
    DegreeMismatch { detail: String },

    #[error("cochain belongs to a different complex (expected {expected}, found {found})")]
    ComplexMismatch { expected: String, found: String },

    #[error("target is not exact: relative obstruction {obstruction:.3e} exceeds tolerance {tol:.1e}")]
    NonExact { obstruction: f64, tol: f64 },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("map `{map}` failed to evaluate at {point:?}")]
    MapEval { map: String, point: Vec<f64> },

    #[error("map `{map}` is not smooth at {point:?}")]
    NonSmooth { map: String, point: Vec<f64> },

    #[error("domain mismatch: {detail}")]
    DomainMismatch { detail: String },

    #[error("unknown map `{name}`; known maps: {known}")]
    UnknownMap { name: String, known: String },

    #[error("k = {k} out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("sampling plan produced no usable samples ({detail})")]
    DegeneratePlan { detail: String },

    #[error("value {value:?} is not a regular value: {detail}; try a different value")]
    NonRegularValue { value: Vec<f64>, detail: String },

    #[error("linking integral {value:.4} is not within 0.2 of an integer")]
    AmbiguousLinking { value: f64 },

    #[error("audit stage `{stage}` failed: {source}")]
    Audit {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("audit inconsistency: {detail}")]
    AuditInconsistent { detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a numerical tolerance (as opposed to invalid input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonExact { .. }
            | Error::NoConvergence { .. }
            | Error::Lp(_)
            | Error::NonRegularValue { .. }
            | Error::AmbiguousLinking { .. }
            | Error::AuditInconsistent { .. } => true,
            Error::Audit { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn validation(invariant: &str, detail: impl Into<String>) -> Self {
        Error::Validation {
            invariant: invariant.to_string(),
            detail: detail.into(),
        }
    }

    pub(crate) fn parameter(name: &str, detail: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            detail: detail.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &str) -> Self {
        Error::Audit {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
