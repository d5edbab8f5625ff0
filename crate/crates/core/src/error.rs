use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A resonant denominator vanished.
    #[error("singular denominator: {0}")]
    Singular(String),

    /// The fixed-step integrator lost trace conservation or produced
    /// non-finite values.
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// An aggregate was requested over an empty set.
    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
