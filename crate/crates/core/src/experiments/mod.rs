//! Capture maps over intruder start positions, boundary extraction and
//! parameter sweeps.

mod contour;
mod grid;
mod sweep;

pub use contour::{extract_boundary, Polyline};
pub use grid::{capture_map, capture_map_in_order, CaptureMap, CellOutcome, GridSpec};
pub use sweep::{run_sweep, SweepEntry, SweepOutput, SweepParameter, SweepSpec};
