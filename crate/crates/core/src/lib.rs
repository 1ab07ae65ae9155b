//! Decentralized simultaneous capture of an intruder by sensing- and
//! communication-limited defenders.
//!
//! Each defender steers at constant speed along a normalized consensus
//! direction built from its neighbours' positions and, if it can sense the
//! intruder, the intruder's position. The crate provides
//!
//! - [`graph`]: interaction matrices `W = W₁ + W₂`, their spectra and a lower
//!   bound on `λ_min(W)` in terms of algebraic connectivity;
//! - [`dynamics`]: the control law, intruder policies and a fixed-step simulator;
//! - [`analysis`]: the Lyapunov capture-time bound and sufficient capture conditions;
//! - [`experiments`]: capture maps, boundary extraction and parameter sweeps.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod linalg;

pub use analysis::{certify, CaptureCertificate};
pub use dynamics::{
    simulate, AgentState, IntruderPolicy, Numerics, Outcome, Scenario, SimulationTrace,
};
pub use error::{BoundError, GraphError, LinalgError, ScenarioError};
pub use geometry::Point;
pub use graph::{build_capture_matrices, CaptureMatrixSet, CommGraph, Edge};
