//! Rank-1 symmetric pp-wave model spaces of signature (2,n).
//!
//! The library has two arithmetic modes. Structure constants, bilinear
//! forms, involutions and every identity that holds on the nose are kept in
//! exact rational arithmetic ([`rational`]); eigen-analysis, matrix
//! exponentials and ODE work run in f64 ([`linalg`]). Each operation
//! documents which mode it expects.

pub mod discrete;
pub mod groups;
pub mod json;
pub mod leaves;
pub mod lie;
pub mod linalg;
pub mod model;
pub mod rational;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("degenerate pairing: {0}")]
    DegeneratePairing(String),
    #[error("non-hyperbolic, cannot normalize: {0}")]
    NonHyperbolic(String),
    #[error("not implemented for flavor H")]
    FlavorH,
    #[error("input error: {0}")]
    Input(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PpError>;
