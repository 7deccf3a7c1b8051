use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid law: {0}")]
    InvalidLaw(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("inconsistent inputs: {0}")]
    Inconsistency(String),

    #[error("enumeration budget exceeded: {needed} assignments > {budget}")]
    BudgetExceeded { needed: f64, budget: f64 },

    #[error("no estimate: all {0} replicas were censored")]
    NoEstimate(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
