//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain [{lo}, {hi}]: lower endpoint must be strictly below upper endpoint")]
    InvalidDomain { lo: f64, hi: f64 },

    #[error("grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),

    #[error("point {0} lies outside the domain")]
    OutsideDomain(f64),

    #[error("non-finite value in {what} at {at}")]
    NonFinite { what: String, at: f64 },

    #[error("gauge {which}({t}) = {value} is outside [0, 1)")]
    GaugeCodomain { which: &'static str, t: f64, value: f64 },

    #[error("quadrature did not converge on [0, {s}]")]
    Quadrature { s: f64 },

    #[error("no preimage of {target} under T{}", match .index { Some(i) => format!(" at step {i}"), None => String::new() })]
    PreimageFailed { target: f64, index: Option<usize> },

    #[error("contraction pair has no integrand for the integral form")]
    MissingIntegrand,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at column {col}: {msg}")]
    Expr { col: usize, msg: String },

    #[error("scenario {field}: {msg}")]
    Scenario { field: String, msg: String },

    #[error("breakpoint {bp} of {map} lies outside the domain")]
    Breakpoint { map: String, bp: f64 },

    #[error("{map} is not defined at x = {x}")]
    NonTotal { map: String, x: f64 },

    #[error("scenario file: {0}")]
    Toml(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
