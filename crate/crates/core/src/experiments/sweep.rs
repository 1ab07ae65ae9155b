use crate::dynamics::Scenario;
use crate::error::ScenarioError;
use crate::graph::{CommGraph, Edge};

use super::contour::{extract_boundary, Polyline};
use super::grid::{capture_map, CaptureMap, GridSpec};

/// One varied parameter and its settings.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepParameter {
    /// Speed of one defender (0-based index).
    DefenderSpeed {
        defender: usize,
        values: Vec<f64>,
    },
    Sensing {
        values: Vec<Vec<bool>>,
    },
    /// Communication edge sets; weights as given.
    CommEdges {
        values: Vec<Vec<Edge>>,
    },
}

impl SweepParameter {
    pub fn len(&self) -> usize {
        match self {
            SweepParameter::DefenderSpeed { values, .. } => values.len(),
            SweepParameter::Sensing { values } => values.len(),
            SweepParameter::CommEdges { values } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Human-readable label of setting `k`.
    pub fn label(&self, k: usize) -> String {
        match self {
            SweepParameter::DefenderSpeed { defender, values } => {
                format!("v{}={}", defender + 1, values[k])
            }
            SweepParameter::Sensing { values } => {
                let bits: String = values[k]
                    .iter()
                    .map(|&b| if b { '1' } else { '0' })
                    .collect();
                format!("b={bits}")
            }
            SweepParameter::CommEdges { values } => {
                let edges: Vec<String> = values[k]
                    .iter()
                    .map(|e| format!("{}-{}", e.i + 1, e.j + 1))
                    .collect();
                format!("edges={}", edges.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base_scenario: Scenario,
    pub parameter: SweepParameter,
}

impl SweepSpec {
    /// The base scenario with setting `k` applied.
    pub fn scenario(&self, k: usize) -> Result<Scenario, ScenarioError> {
        let mut s = self.base_scenario.clone();
        let n = s.n_defenders();
        match &self.parameter {
            SweepParameter::DefenderSpeed { defender, values } => {
                let slot = s
                    .defender_speeds
                    .get_mut(*defender)
                    .ok_or(ScenarioError::Length {
                        what: "defender speeds (sweep index)",
                        got: *defender + 1,
                        expected: n,
                    })?;
                *slot = values[k];
            }
            SweepParameter::Sensing { values } => {
                let edges = s.graph.edges();
                s.graph = CommGraph::from_edges(n, &edges, values[k].clone())?;
            }
            SweepParameter::CommEdges { values } => {
                s.graph = CommGraph::from_edges(n, &values[k], s.graph.sensing().to_vec())?;
            }
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub map: CaptureMap,
    pub boundary: Vec<Polyline>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub label: String,
    pub result: Result<SweepOutput, ScenarioError>,
}

/// One capture map and boundary per setting. A failing setting does not stop the others.
pub fn run_sweep(spec: &SweepSpec, grid: &GridSpec) -> Result<Vec<SweepEntry>, ScenarioError> {
    if spec.parameter.is_empty() {
        return Err(ScenarioError::Length {
            what: "sweep values",
            got: 0,
            expected: 1,
        });
    }
    grid.validate()?;
    Ok((0..spec.parameter.len())
        .map(|k| SweepEntry {
            label: spec.parameter.label(k),
            result: spec.scenario(k).and_then(|s| {
                let map = capture_map(&s, grid)?;
                let boundary = extract_boundary(&map);
                Ok(SweepOutput { map, boundary })
            }),
        })
        .collect())
}
