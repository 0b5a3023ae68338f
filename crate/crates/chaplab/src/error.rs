//! Error types shared across the crate.

use thiserror::Error;

/// Failure modes of the solver pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("quadrature failed to converge on [{a}, {b}] (requested tol {tol:e})")]
    QuadratureNonConvergence { a: f64, b: f64, tol: f64 },

    #[error("near-singular inversion at (alpha, beta) = ({alpha}, {beta}), |J| = {jac:e}")]
    NearSingularInversion { alpha: f64, beta: f64, jac: f64 },

    #[error("point (t, x) = ({t}, {x}) lies outside the classical existence domain (t0 = {t0}); pass the post-blowup flag to evaluate off the singular set")]
    OutsideExistenceDomain { t: f64, x: f64, t0: f64 },

    #[error("{set} witness not found: {detail}")]
    WitnessNotFound { set: String, detail: String },

    #[error("no blowup detected in the scan window")]
    NoBlowupDetected,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal consistency fault: {0}")]
    Internal(String),

    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
