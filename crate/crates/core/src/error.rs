use std::path::PathBuf;

use thiserror::Error;

use crate::constitutive::FieldId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid geometry: R = {r}, L = {l}")]
    InvalidGeometry { r: f64, l: f64 },

    #[error("degenerate domain: L - R = {width:e} is below the resolvable threshold")]
    DegenerateDomain { width: f64 },

    #[error("non-finite input to {context}")]
    NonFiniteInput { context: &'static str },

    #[error("field {0:?} does not diffuse")]
    NonDiffusingField(FieldId),

    #[error("non-finite state detected at t = {t} in field {field}")]
    NonFiniteState { t: f64, field: &'static str },

    #[error("step failed at t = {t} (dt = {dt:e}): {reason}")]
    StepFailure { t: f64, dt: f64, reason: String },

    #[error("bracket [{lo}, {hi}] does not separate healed from non-healed outcomes")]
    NoBracket { lo: f64, hi: f64 },

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
