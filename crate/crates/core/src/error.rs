use thiserror::Error;

use crate::decimal::DecimalError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("invalid CAPEX item `{label}`: {reason}")]
    InvalidCapex { label: String, reason: String },
    #[error("{what} must not be negative")]
    NegativeValue { what: String },
    #[error("invalid discount policy: {0}")]
    InvalidDiscount(String),
    #[error("volume projection has {got} periods, horizon has {expected}")]
    VolumeLength { expected: usize, got: usize },
    #[error("scenario name must not be empty")]
    EmptyName,
    #[error("duplicate scenario name `{0}`")]
    DuplicateName(String),
    #[error("LCOAI is undefined for scenario `{scenario}`: zero valid inferences")]
    UndefinedMetric { scenario: String },
    #[error("scenarios `{a}` and `{b}` are not comparable: {reason}")]
    IncompatibleScenarios {
        a: String,
        b: String,
        reason: String,
    },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("arithmetic overflow")]
    Overflow,
    #[error(transparent)]
    Decimal(#[from] DecimalError),
}
