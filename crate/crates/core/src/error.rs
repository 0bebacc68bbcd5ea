use thiserror::Error;

/// Errors raised by map evaluation, curve functionals and the distortion engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {point:?} lies outside the validity region of {map}")]
    OutOfRegion { map: String, point: Vec<f64> },

    #[error("non-finite value while evaluating {0}")]
    NonFinite(String),

    #[error("singular Jacobian at {point:?} (relative determinant {rel_det:e})")]
    SingularJacobian { point: Vec<f64>, rel_det: f64 },

    #[error("curve is not regular at t = {t}")]
    Irregular { t: f64 },

    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown scenario family `{0}`")]
    UnknownFamily(String),

    #[error("hypothesis violated at step {step}: {reason}")]
    Hypothesis { step: usize, reason: String },

    #[error("map sequence is empty")]
    EmptySequence,

    #[error("step {index}: {source}")]
    AtStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at_step(index: usize, source: Error) -> Self {
        Error::AtStep {
            index,
            source: Box::new(source),
        }
    }

    /// Step index carried by this error, if it arose inside a composition.
    pub fn step(&self) -> Option<usize> {
        match self {
            Error::Hypothesis { step, .. } => Some(*step),
            Error::AtStep { index, .. } => Some(*index),
            _ => None,
        }
    }

    /// The innermost error, with step wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }

    /// True when the error signals that a hypothesis of the distortion theorems
    /// fails on the data (as opposed to malformed input).
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::Hypothesis { .. }
                | Error::SingularJacobian { .. }
                | Error::OutOfRegion { .. }
                | Error::NonFinite(_)
                | Error::Irregular { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
