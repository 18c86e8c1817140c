use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size limit (atom number, Fock truncation) was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A linearized (planar / displaced-picture) model was pushed past its validity range.
    #[error("outside validity range: {0}")]
    Validity(String),

    /// A parameter set failed validation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}
