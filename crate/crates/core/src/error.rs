//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the arithmetic, series, linear-algebra and bracket layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("series ring mismatch: {0}")]
    SpecMismatch(String),
    #[error("Laurent window overflow in variable {var}: exponent {exponent} below hard bound {bound}")]
    WindowOverflow { var: String, exponent: i32, bound: i32 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("truncation exhausted: {0}")]
    TruncationExhausted(String),
    #[error("not a one-unit: {0}")]
    NotAOneUnit(String),
    #[error("integrality failure at {location}: valuation {valuation}")]
    IntegralityFailure { location: String, valuation: i32 },
    #[error("logarithm is not strict: {0}")]
    NotStrict(String),
    #[error("not invertible: {0}")]
    NonInvertible(String),
    #[error("nonzero constant term")]
    NonzeroConstantTerm,
    #[error("height undetectable below degree cap {cap}")]
    HeightUndetectable { cap: i32 },
    #[error("span of B is not contained in span of Z (generator {index})")]
    NotASubmodule { index: usize },
    #[error("cap instability: {first} at caps {caps:?}, {second} at doubled caps")]
    CapInstability { caps: Vec<i32>, first: String, second: String },
    #[error("shadow classification failure: {0}")]
    ShadowClassificationFailure(String),
    #[error("parse error at {position}: {message}")]
    ParseError { position: usize, message: String },
    #[error("divisor {0} is not a unit in the integral ring")]
    DivisorNotUnit(i64),
}

pub type Result<T> = std::result::Result<T, Error>;
