use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent {exponent} exceeds the overflow guard of 700")]
    Overflow { exponent: f64 },

    #[error("supremum bracket did not converge: relative gap {gap:e} after {levels} refinement levels")]
    RefinementExhausted { gap: f64, levels: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge (last change {change:e})")]
    QuadratureNonConvergence { change: f64 },

    #[error("witness stage {0} is empty at the current resolution")]
    StageEmpty(usize),

    #[error("cascade collapsed at stage {0}: measured |f| fell below the claimed bound")]
    StageCollapse(usize),

    #[error("hypothesis fails at x = {x}")]
    HypothesisFails { x: f64 },

    #[error("multi-index enumeration of {terms} terms exceeds the cap of {cap}")]
    ExplosionGuard { terms: u128, cap: u128 },

    #[error("no interval with a Lebesgue point above resolution was found")]
    NotFound,

    #[error("precondition violated at x = {x}: {what}")]
    Precondition { x: f64, what: String },

    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),

    #[error("integer overflow computing {0}")]
    IntegerOverflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
