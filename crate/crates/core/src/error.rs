use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("quadrature did not converge on [{lo}, {hi}] (estimated error {error:e})")]
    QuadratureFailed { lo: f64, hi: f64, error: f64 },

    #[error("derivative requested for non-C1 test function {0}")]
    NotDifferentiable(String),

    #[error("small-jump approximation refused: {0}")]
    SmallJumpApproximation(String),

    #[error("path does not match the supplied model or grid: {0}")]
    PathMismatch(String),

    #[error("r = {0} is not in the index set I of the jump measure")]
    NotInIndexSet(f64),

    #[error("verdict {0} is not a CLT regime")]
    NotClt(String),

    #[error("no small-time regime covers {0}")]
    NoSmallTimeRegime(String),

    #[error("centering input missing: {0}")]
    MissingCentering(String),

    #[error("component {index} is neither a power-class (J') nor a bounded (J'') component: {reason}")]
    NotJointComponent { index: usize, reason: String },

    #[error("inadmissible test function: {0}")]
    Inadmissible(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid experiment configuration: {0}")]
    Config(String),
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
