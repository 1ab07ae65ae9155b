//! Error types. Defender indices are stored 0-based and displayed 1-based.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("matrix is not symmetric at ({i}, {j}): {upper} vs {lower}")]
    NotSymmetric {
        i: usize,
        j: usize,
        upper: f64,
        lower: f64,
    },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one defender")]
    Empty,
    #[error("weight matrix is {rows}x{cols} but the sensing vector has {sensing} entries")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        sensing: usize,
    },
    #[error("weight w({}, {}) = {value} must be finite and nonnegative", .i + 1, .j + 1)]
    InvalidWeight { i: usize, j: usize, value: f64 },
    #[error("weights are asymmetric at ({}, {}): w_ij = {wij}, w_ji = {wji}", .i + 1, .j + 1)]
    Asymmetric {
        i: usize,
        j: usize,
        wij: f64,
        wji: f64,
    },
    #[error("diagonal weight w({}, {}) = {value} must be zero", .i + 1, .i + 1)]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("edge ({}, {}) references a defender outside 1..={n}", .i + 1, .j + 1)]
    EdgeOutOfRange { i: usize, j: usize, n: usize },
    #[error("self-loop on defender {}", .i + 1)]
    SelfLoop { i: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Why the λ_min lower bound cannot be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("no defender senses the intruder (m = 0)")]
    NoSensing,
    #[error("communication graph is disconnected")]
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{what} has {got} entries, expected {expected}")]
    Length {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("speed of defender {} must be finite and positive, got {value}", .index + 1)]
    DefenderSpeed { index: usize, value: f64 },
    #[error("intruder speed must be finite and positive, got {0}")]
    IntruderSpeed(f64),
    #[error("numerics.{name} must be finite and positive, got {value}")]
    Numerics { name: &'static str, value: f64 },
    #[error("non-finite coordinate in {0}")]
    NonFinitePosition(&'static str),
    #[error("scripted heading schedule: {0}")]
    Schedule(String),
    #[error("modelling assumptions violated: {0}")]
    Assumptions(String),
}
