use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, Outcome, OutcomeClass, Scenario};
use crate::error::ScenarioError;
use crate::geometry::Point;
use crate::graph::{build_capture_matrices, validate_assumptions};

/// Rectangular lattice of intruder start positions, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    /// Horizon for every cell, independent of the certificate.
    pub t_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -15.0,
            x_max: 15.0,
            y_min: -15.0,
            y_max: 15.0,
            nx: 81,
            ny: 81,
            t_max: dynamics::DEFAULT_T_MAX,
        }
    }
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
            nx: n,
            ny: n,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(ScenarioError::Numerics {
                name: "grid resolution (need at least 2x2)",
                value: self.nx.min(self.ny) as f64,
            });
        }
        for (name, lo, hi) in [
            ("grid x range", self.x_min, self.x_max),
            ("grid y range", self.y_min, self.y_max),
        ] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(ScenarioError::Numerics {
                    name,
                    value: hi - lo,
                });
            }
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(ScenarioError::Numerics {
                name: "grid t_max",
                value: self.t_max,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.nx - 1) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * j as f64 / (self.ny - 1) as f64
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        Point::new(self.x(i), self.y(j))
    }

    /// Row-major index, rows along y.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }
}

/// Outcome of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellOutcome {
    Capture { time: f64 },
    Breach { time: f64 },
    Timeout { time: f64 },
    Error { message: String },
}

impl CellOutcome {
    pub fn is_capture(&self) -> bool {
        matches!(self, CellOutcome::Capture { .. })
    }

    pub fn capture_time(&self) -> Option<f64> {
        match self {
            CellOutcome::Capture { time } => Some(*time),
            _ => None,
        }
    }

    pub fn class(&self) -> Option<OutcomeClass> {
        match self {
            CellOutcome::Capture { .. } => Some(OutcomeClass::Capture),
            CellOutcome::Breach { .. } => Some(OutcomeClass::Breach),
            CellOutcome::Timeout { .. } => Some(OutcomeClass::Timeout),
            CellOutcome::Error { .. } => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CellOutcome::Capture { .. } => "capture",
            CellOutcome::Breach { .. } => "breach",
            CellOutcome::Timeout { .. } => "timeout",
            CellOutcome::Error { .. } => "error",
        }
    }
}

impl From<Outcome> for CellOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::SimultaneousCapture(time) => CellOutcome::Capture { time },
            Outcome::Breach(time) => CellOutcome::Breach { time },
            Outcome::Timeout(time) => CellOutcome::Timeout { time },
        }
    }
}

/// Outcomes over a lattice of intruder start positions.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureMap {
    pub grid: GridSpec,
    /// Row-major, see [`GridSpec::index`].
    pub outcomes: Vec<CellOutcome>,
}

impl CaptureMap {
    pub fn outcome(&self, i: usize, j: usize) -> &CellOutcome {
        &self.outcomes[self.grid.index(i, j)]
    }

    /// Cells from which the intruder is not captured (breach, timeout or error).
    pub fn breach_count(&self) -> usize {
        self.outcomes.iter().filter(|o| !o.is_capture()).count()
    }

    pub fn capture_count(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_capture()).count()
    }

    pub fn count(&self, class: OutcomeClass) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.class() == Some(class))
            .count()
    }

    /// Largest finite capture time, if any cell captured.
    pub fn max_capture_time(&self) -> Option<f64> {
        self.outcomes
            .iter()
            .filter_map(CellOutcome::capture_time)
            .reduce(f64::max)
    }
}

/// Simulates every cell with the intruder starting at the cell's lattice point.
///
/// The base scenario must be valid and satisfy the modelling assumptions.
/// Cells are evaluated in parallel on the current rayon pool; results are
/// merged by cell index, so the map does not depend on evaluation order.
pub fn capture_map(base: &Scenario, grid: &GridSpec) -> Result<CaptureMap, ScenarioError> {
    grid.validate()?;
    let mut template = base.clone();
    template.numerics.t_max = grid.t_max;
    template.numerics.sample_stride = 0;
    template.validate()?;
    let report = validate_assumptions(&template.graph);
    if !report.all_pass() {
        return Err(ScenarioError::Assumptions(report.failures().join("; ")));
    }
    let cm = build_capture_matrices(&template.graph)?;
    let outcomes = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = grid.coords(idx);
            evaluate_cell(&template, &cm, grid.point(i, j))
        })
        .collect();
    Ok(CaptureMap {
        grid: *grid,
        outcomes,
    })
}

fn evaluate_cell(
    template: &Scenario,
    cm: &crate::graph::CaptureMatrixSet,
    start: Point,
) -> CellOutcome {
    let scenario = template.with_intruder_at(start);
    match scenario.validate() {
        Ok(()) => dynamics::run(&scenario, cm).outcome.into(),
        Err(e) => CellOutcome::Error {
            message: e.to_string(),
        },
    }
}

/// Sequential evaluation in an arbitrary cell order; used to check order independence.
pub fn capture_map_in_order(
    base: &Scenario,
    grid: &GridSpec,
    order: &[usize],
) -> Result<CaptureMap, ScenarioError> {
    grid.validate()?;
    let mut template = base.clone();
    template.numerics.t_max = grid.t_max;
    template.numerics.sample_stride = 0;
    template.validate()?;
    let cm = build_capture_matrices(&template.graph)?;
    let mut outcomes: Vec<Option<CellOutcome>> = vec![None; grid.len()];
    for &idx in order {
        let (i, j) = grid.coords(idx);
        outcomes[idx] = Some(evaluate_cell(&template, &cm, grid.point(i, j)));
    }
    Ok(CaptureMap {
        grid: *grid,
        outcomes: outcomes
            .into_iter()
            .map(|o| {
                o.unwrap_or(CellOutcome::Error {
                    message: "cell not evaluated".into(),
                })
            })
            .collect(),
    })
}
