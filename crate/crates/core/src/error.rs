use std::path::PathBuf;

use crate::autodiff::Op;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("non-finite value produced by {op:?} at tape node {node}")]
    NonFiniteTape { op: Op, node: usize },

    #[error("non-finite gradient at parameter {index}")]
    NonFiniteGradient { index: usize },

    #[error("integrand is not finite at u = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("Newton iteration for Gauss-Legendre order {order} did not converge")]
    QuadratureConvergence { order: usize },

    #[error("negative radicand {radicand} in outer solution at x1 = {x1}")]
    DomainViolation { x1: f64, radicand: f64 },

    #[error("front oracle left the domain at t = {t}; use a finer resolution ({hint})")]
    Resolution { t: f64, hint: String },

    #[error("inner profile degenerates at u = {at}: first integral vanished before reaching the outer value")]
    DegenerateProfile { at: f64 },

    #[error("tail integral did not fall below tolerance by |xi| = {limit}")]
    TailConvergence { limit: f64 },

    #[error("reference norm is zero; relative error undefined")]
    UndefinedMetric,

    #[error("unknown {kind} `{key}`; valid keys: {valid}")]
    UnknownKey { kind: &'static str, key: String, valid: String },

    #[error("training diverged at iteration {iteration}: {source}")]
    Diverged {
        iteration: usize,
        #[source]
        source: Box<Error>,
        /// Loss history up to the last good iteration.
        history: Vec<f64>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
