use thiserror::Error;

/// Errors raised by the conformal, wave, simulation and estimation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transformation is singular at this event (denominator {denominator:e})")]
    SingularTransform { denominator: f64 },

    #[error("event lies beyond the singular surface of the transformation (denominator {denominator:e})")]
    DomainCrossing { denominator: f64 },

    #[error("flow integration diverged at step {step} (state norm {norm:e})")]
    StepDivergence { step: usize, norm: f64 },

    #[error("slope map is singular (|B*slope + A| = {magnitude:e})")]
    SlopeSingular { magnitude: f64 },

    #[error("radius must be strictly positive")]
    ZeroRadius,

    #[error("time coordinate {t:e} is not on the past light cone")]
    NotPastCone { t: f64 },

    #[error("inbound ray fixed point did not settle (residual {residual:e}, bound {bound:e})")]
    NotConverged { residual: f64, bound: f64 },

    #[error("epoch {epoch:e} outside [{start:e}, {end:e}]")]
    EpochOutOfRange { epoch: f64, start: f64, end: f64 },

    #[error("invalid config key `{key}`: {reason}")]
    ConfigInvalid { key: String, reason: String },

    #[error("record {index} has zero range")]
    ZeroRange { index: usize },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("record {index} has non-positive or non-finite sigma")]
    ZeroSigma { index: usize },

    #[error("malformed CSV at line {line}: {reason}")]
    MalformedCsv { line: u64, reason: String },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
