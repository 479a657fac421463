use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands live in different polynomial rings")]
    RingMismatch,

    #[error("variable `{0}` is not part of this ring")]
    UnknownVariable(String),

    #[error("`{0}` is a parameter and cannot be differentiated")]
    NotDifferentiable(String),

    #[error("negative power of `{0}` at zero: generator is not regular at the contraction point")]
    PoleAtContraction(String),

    #[error("no numeric value assigned to `{0}`")]
    MissingAssignment(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("negative exponent on non-invertible variable `{0}`")]
    NonInvertible(String),

    #[error("generator index {0} is unsupported (only n >= -1 is polynomial)")]
    UnsupportedIndex(i64),

    #[error("operator already carries body-indexed symbols")]
    AlreadyLifted,

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("correlator is not differentiable at this point: {0}")]
    NonDifferentiablePoint(String),

    #[error("operator of order {0} where a first-order operator is required")]
    NotFirstOrder(usize),

    #[error("sampling grid is empty")]
    EmptyGrid,

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature did not converge (error estimate {estimate:e})")]
    NonConvergence { estimate: f64 },

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
