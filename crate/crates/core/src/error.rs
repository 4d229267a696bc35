use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A distribution or kernel failed its structural checks.
    #[error("invalid distribution: {0}")]
    Validation(String),
    /// A scalar argument fell outside its mathematical domain.
    #[error("argument out of domain: {0}")]
    Domain(String),
    /// The call itself is malformed (overlapping axis groups, missing axes, ...).
    #[error("invalid usage: {0}")]
    Usage(String),
    /// Coding parameters that cannot produce a usable code.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("enumeration of {states} states exceeds the cap of {cap}")]
    EnumerationTooLarge { states: u128, cap: u128 },
}
