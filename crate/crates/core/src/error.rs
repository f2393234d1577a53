use thiserror::Error;

/// Errors raised by the analytics, oracles and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("no Cramér root: {0}")]
    NoRoot(String),
    #[error("lattice law rejected: {0}")]
    Lattice(String),
    #[error("enumeration guard exceeded: {0}")]
    Guard(String),
    #[error("cannot merge estimates of different targets: {0}")]
    MixedTarget(String),
    #[error("floating-point overflow: {0}")]
    Overflow(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable tag, used in the CLI error payload.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Range(_) => "RangeError",
            Error::NoRoot(_) => "NoRootError",
            Error::Lattice(_) => "LatticeLawError",
            Error::Guard(_) => "GuardError",
            Error::MixedTarget(_) => "MixedTargetError",
            Error::Overflow(_) => "OverflowError",
            Error::Config(_) => "ConfigError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
