use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point ({x}, {y}, {z}) lies outside the grid; offending axis {axis} (value {value}, allowed [{min}, {max}])")]
    OutOfBounds {
        x: f64,
        y: f64,
        z: f64,
        axis: char,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("degenerate gradient at ({0}, {1}, {2})")]
    DegenerateGradient(f64, f64, f64),

    #[error("no surface: the field has no zero crossing")]
    NoSurface,

    #[error("shape collapsed{0}")]
    ShapeCollapsed(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("CFL violation: step {step} with max speed {speed} exceeds {limit} cells per step; substep the advection")]
    Cfl { step: f64, speed: f64, limit: f64 },

    #[error("displacement of {magnitude} at level {level} exceeds the per-level limit {limit}; refine the schedule")]
    DisplacementTooLarge {
        level: usize,
        magnitude: f64,
        limit: f64,
    },

    #[error("seed {index} could not be projected onto the surface")]
    SeedProjection { index: usize },

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("payload size mismatch: expected {expected} bytes, found {actual}")]
    PayloadSize { expected: usize, actual: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
