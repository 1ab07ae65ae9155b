//! Scenario documents (TOML).
//!
//! ```toml
//! [agents]
//! positions = [[5.0, 5.0], [-5.0, -5.0], [-5.0, 5.0], [5.0, -5.0]]
//! speeds = [1.0, 1.0, 1.0, 1.0]
//!
//! [graph]
//! sensing = [1, 1, 1, 1]
//! edges = [{ i = 1, j = 2 }, { i = 1, j = 3, w = 0.5 }]   # or: adjacency = [[...], ...]
//!
//! [intruder]
//! position = [-5.0, 10.0]
//! speed = 0.1
//! policy = "direct"          # or "scripted" with schedule = [{ start, end, heading }]
//!
//! [target]                   # optional, default origin
//! position = [0.0, 0.0]
//!
//! [numerics]                 # optional, every key defaulted
//! dt = 0.001
//!
//! [experiment.grid]          # optional, used by capture-map and sweep
//! [experiment.sweep]         # optional, used by sweep
//! ```
//!
//! Defender indices in the document are 1-based. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use simulcap::analysis::default_horizon;
use simulcap::dynamics::{
    HeadingSchedule, HeadingSegment, Integrator, DEFAULT_DT, DEFAULT_EPS_CAPTURE,
    DEFAULT_EPS_SINGULAR, DEFAULT_EPS_TARGET, DEFAULT_SAMPLE_STRIDE,
};
use simulcap::experiments::{GridSpec, SweepParameter};
use simulcap::linalg::Matrix;
use simulcap::{
    build_capture_matrices, AgentState, CommGraph, Edge, GraphError, IntruderPolicy, Numerics,
    Point, Scenario,
};
use toml::{Table, Value};

use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentsSection {
    positions: Vec<[f64; 2]>,
    speeds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    i: usize,
    j: usize,
    #[serde(default = "unit_weight")]
    w: f64,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphSection {
    sensing: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<EdgeEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adjacency: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntruderSection {
    position: [f64; 2],
    speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    policy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule: Option<Vec<HeadingSegment>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetSection {
    position: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumericsSection {
    dt: Option<f64>,
    eps_capture: Option<f64>,
    eps_target: Option<f64>,
    eps_singular: Option<f64>,
    t_max: Option<f64>,
    integrator: Option<Integrator>,
    sample_stride: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    x_min: Option<f64>,
    x_max: Option<f64>,
    y_min: Option<f64>,
    y_max: Option<f64>,
    nx: Option<usize>,
    ny: Option<usize>,
    t_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    defender: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    speeds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sensing: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge_sets: Option<Vec<Vec<EdgeEntry>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    agents: AgentsSection,
    graph: GraphSection,
    intruder: IntruderSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<TargetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    numerics: Option<NumericsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    experiment: Option<ExperimentSection>,
}

/// A fully resolved scenario document.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub grid: GridSpec,
    pub sweep: Option<SweepParameter>,
    /// `key = value` for every default the parser filled in.
    pub defaults_applied: Vec<String>,
}

const ROOT_KEYS: &[&str] = &[
    "agents",
    "graph",
    "intruder",
    "target",
    "numerics",
    "experiment",
];
const AGENT_KEYS: &[&str] = &["positions", "speeds"];
const GRAPH_KEYS: &[&str] = &["sensing", "edges", "adjacency"];
const EDGE_KEYS: &[&str] = &["i", "j", "w"];
const INTRUDER_KEYS: &[&str] = &["position", "speed", "policy", "schedule"];
const SEGMENT_KEYS: &[&str] = &["start", "end", "heading"];
const TARGET_KEYS: &[&str] = &["position"];
const NUMERICS_KEYS: &[&str] = &[
    "dt",
    "eps_capture",
    "eps_target",
    "eps_singular",
    "t_max",
    "integrator",
    "sample_stride",
];
const EXPERIMENT_KEYS: &[&str] = &["grid", "sweep"];
const GRID_KEYS: &[&str] = &["x_min", "x_max", "y_min", "y_max", "nx", "ny", "t_max"];
const SWEEP_KEYS: &[&str] = &["parameter", "defender", "speeds", "sensing", "edge_sets"];

fn check_table(table: &Table, path: &str, allowed: &[&str]) -> Result<(), ConfigError> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey {
                path: join(path, key),
            });
        }
    }
    Ok(())
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn sub_table<'a>(
    table: &'a Table,
    path: &str,
    key: &str,
) -> Result<Option<&'a Table>, ConfigError> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(ConfigError::invalid(join(path, key), "expected a table")),
    }
}

fn check_table_array(
    table: &Table,
    path: &str,
    key: &str,
    allowed: &[&str],
) -> Result<(), ConfigError> {
    if let Some(Value::Array(items)) = table.get(key) {
        for (k, item) in items.iter().enumerate() {
            if let Value::Table(t) = item {
                check_table(t, &format!("{}[{k}]", join(path, key)), allowed)?;
            }
        }
    }
    Ok(())
}

/// Rejects keys outside the schema, reporting the full path of the first one found.
fn check_keys(root: &Table) -> Result<(), ConfigError> {
    check_table(root, "", ROOT_KEYS)?;
    if let Some(t) = sub_table(root, "", "agents")? {
        check_table(t, "agents", AGENT_KEYS)?;
    }
    if let Some(t) = sub_table(root, "", "graph")? {
        check_table(t, "graph", GRAPH_KEYS)?;
        check_table_array(t, "graph", "edges", EDGE_KEYS)?;
    }
    if let Some(t) = sub_table(root, "", "intruder")? {
        check_table(t, "intruder", INTRUDER_KEYS)?;
        check_table_array(t, "intruder", "schedule", SEGMENT_KEYS)?;
    }
    if let Some(t) = sub_table(root, "", "target")? {
        check_table(t, "target", TARGET_KEYS)?;
    }
    if let Some(t) = sub_table(root, "", "numerics")? {
        check_table(t, "numerics", NUMERICS_KEYS)?;
    }
    if let Some(exp) = sub_table(root, "", "experiment")? {
        check_table(exp, "experiment", EXPERIMENT_KEYS)?;
        if let Some(t) = sub_table(exp, "experiment", "grid")? {
            check_table(t, "experiment.grid", GRID_KEYS)?;
        }
        if let Some(t) = sub_table(exp, "experiment", "sweep")? {
            check_table(t, "experiment.sweep", SWEEP_KEYS)?;
            if let Some(Value::Array(sets)) = t.get("edge_sets") {
                for (k, set) in sets.iter().enumerate() {
                    if let Value::Array(edges) = set {
                        for (l, e) in edges.iter().enumerate() {
                            if let Value::Table(e) = e {
                                check_table(
                                    e,
                                    &format!("experiment.sweep.edge_sets[{k}][{l}]"),
                                    EDGE_KEYS,
                                )?;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn section<T: for<'de> Deserialize<'de>>(
    root: &Table,
    key: &'static str,
) -> Result<Option<T>, ConfigError> {
    root.get(key)
        .map(|v| {
            v.clone()
                .try_into::<T>()
                .map_err(|e| ConfigError::invalid(key, e.message().to_string()))
        })
        .transpose()
}

fn required<T: for<'de> Deserialize<'de>>(
    root: &Table,
    key: &'static str,
) -> Result<T, ConfigError> {
    section(root, key)?.ok_or(ConfigError::MissingSection(key))
}

fn point(p: [f64; 2], path: &str) -> Result<Point, ConfigError> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(p.into())
    } else {
        Err(ConfigError::invalid(path, "coordinates must be finite"))
    }
}

fn positive(value: f64, path: &str) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::invalid(
            path,
            format!("must be finite and positive, got {value}"),
        ))
    }
}

fn speed(value: f64, path: String) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::NonPositiveSpeed { path, value })
    }
}

fn sensing_flags(values: &[u8], n: usize, path: &str) -> Result<Vec<bool>, ConfigError> {
    if values.len() != n {
        return Err(ConfigError::invalid(
            path,
            format!("has {} entries, expected {n}", values.len()),
        ));
    }
    values
        .iter()
        .enumerate()
        .map(|(k, &b)| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(ConfigError::invalid(
                format!("{path}[{k}]"),
                "sensing flags must be 0 or 1",
            )),
        })
        .collect()
}

fn edges_from(entries: &[EdgeEntry], n: usize, path: &str) -> Result<Vec<Edge>, ConfigError> {
    let mut out: Vec<Edge> = Vec::with_capacity(entries.len());
    for (k, e) in entries.iter().enumerate() {
        let here = format!("{path}[{k}]");
        if e.i == 0 || e.j == 0 || e.i > n || e.j > n {
            return Err(ConfigError::invalid(
                here,
                format!("defender indices are 1-based and at most {n}"),
            ));
        }
        if e.i == e.j {
            return Err(ConfigError::invalid(here, "self-loops are not allowed"));
        }
        if !(e.w.is_finite() && e.w >= 0.0) {
            return Err(ConfigError::invalid(
                here,
                format!("weight must be nonnegative, got {}", e.w),
            ));
        }
        let (i, j) = (e.i - 1, e.j - 1);
        if let Some(prev) = out
            .iter()
            .find(|p| (p.i == i && p.j == j) || (p.i == j && p.j == i))
        {
            if prev.weight != e.w {
                let (wij, wji) = if prev.i == i {
                    (e.w, prev.weight)
                } else {
                    (prev.weight, e.w)
                };
                return Err(ConfigError::AsymmetricWeights {
                    path: here,
                    i: e.i,
                    j: e.j,
                    wij,
                    wji,
                });
            }
            continue;
        }
        out.push(Edge { i, j, weight: e.w });
    }
    Ok(out)
}

fn graph_error(err: GraphError, path: &str) -> ConfigError {
    match err {
        GraphError::Asymmetric { i, j, wij, wji } => ConfigError::AsymmetricWeights {
            path: path.to_string(),
            i: i + 1,
            j: j + 1,
            wij,
            wji,
        },
        other => ConfigError::invalid(path, other.to_string()),
    }
}

fn build_graph(g: &GraphSection, n: usize) -> Result<CommGraph, ConfigError> {
    let sensing = sensing_flags(&g.sensing, n, "graph.sensing")?;
    let graph = match (&g.edges, &g.adjacency) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::invalid(
                "graph",
                "give either `edges` or `adjacency`, not both",
            ))
        }
        (None, None) => return Err(ConfigError::MissingKey("graph.edges".into())),
        (Some(entries), None) => {
            let edges = edges_from(entries, n, "graph.edges")?;
            CommGraph::from_edges(n, &edges, sensing).map_err(|e| graph_error(e, "graph.edges"))?
        }
        (None, Some(rows)) => {
            let m = Matrix::from_rows(rows)
                .map_err(|e| ConfigError::invalid("graph.adjacency", e.to_string()))?;
            if m.dim() != n {
                return Err(ConfigError::invalid(
                    "graph.adjacency",
                    format!("is {0}x{0}, expected {n}x{n}", m.dim()),
                ));
            }
            CommGraph::new(m, sensing).map_err(|e| graph_error(e, "graph.adjacency"))?
        }
    };
    let key = if g.edges.is_some() {
        "graph.edges"
    } else {
        "graph.adjacency"
    };
    build_capture_matrices(&graph).map_err(|e| graph_error(e, key))?;
    Ok(graph)
}

fn or_default<T: Copy + std::fmt::Display>(
    value: Option<T>,
    default: T,
    key: &str,
    applied: &mut Vec<String>,
) -> T {
    value.unwrap_or_else(|| {
        applied.push(format!("{key} = {default}"));
        default
    })
}

/// Parses and validates a scenario document, applying and recording defaults.
pub fn parse_scenario(document: &str) -> Result<ScenarioConfig, ConfigError> {
    let root: Table = document
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    check_keys(&root)?;

    let agents: AgentsSection = required(&root, "agents")?;
    let graph_section: GraphSection = required(&root, "graph")?;
    let intruder: IntruderSection = required(&root, "intruder")?;
    let target: Option<TargetSection> = section(&root, "target")?;
    let numerics: Option<NumericsSection> = section(&root, "numerics")?;
    let experiment: Option<ExperimentSection> = section(&root, "experiment")?;
    let mut applied = Vec::new();

    let n = agents.positions.len();
    if n == 0 {
        return Err(ConfigError::invalid(
            "agents.positions",
            "at least one defender is required",
        ));
    }
    if agents.speeds.len() != n {
        return Err(ConfigError::invalid(
            "agents.speeds",
            format!("has {} entries, expected {n}", agents.speeds.len()),
        ));
    }
    let defenders = agents
        .positions
        .iter()
        .enumerate()
        .map(|(k, &p)| point(p, &format!("agents.positions[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let defender_speeds = agents
        .speeds
        .iter()
        .enumerate()
        .map(|(k, &v)| speed(v, format!("agents.speeds[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let graph = build_graph(&graph_section, n)?;

    let intruder_speed = speed(intruder.speed, "intruder.speed".into())?;
    let intruder_position = point(intruder.position, "intruder.position")?;
    let policy_name = intruder.policy.clone().unwrap_or_else(|| {
        applied.push("intruder.policy = \"direct\"".into());
        "direct".into()
    });
    let policy = match (policy_name.as_str(), &intruder.schedule) {
        ("direct", None) => IntruderPolicy::Direct,
        ("direct", Some(_)) => {
            return Err(ConfigError::invalid(
                "intruder.schedule",
                "only allowed with policy = \"scripted\"",
            ))
        }
        ("scripted", Some(segments)) => IntruderPolicy::Scripted(
            HeadingSchedule::new(segments.clone())
                .map_err(|e| ConfigError::invalid("intruder.schedule", e.to_string()))?,
        ),
        ("scripted", None) => return Err(ConfigError::MissingKey("intruder.schedule".into())),
        (other, _) => {
            return Err(ConfigError::invalid(
                "intruder.policy",
                format!("unknown policy `{other}`, expected \"direct\" or \"scripted\""),
            ))
        }
    };

    let target = match target {
        Some(t) => point(t.position, "target.position")?,
        None => {
            applied.push("target.position = [0, 0]".into());
            Point::ORIGIN
        }
    };

    let ns = numerics.unwrap_or_default();
    let mut num = Numerics {
        dt: positive(
            or_default(ns.dt, DEFAULT_DT, "numerics.dt", &mut applied),
            "numerics.dt",
        )?,
        eps_capture: positive(
            or_default(
                ns.eps_capture,
                DEFAULT_EPS_CAPTURE,
                "numerics.eps_capture",
                &mut applied,
            ),
            "numerics.eps_capture",
        )?,
        eps_target: positive(
            or_default(
                ns.eps_target,
                DEFAULT_EPS_TARGET,
                "numerics.eps_target",
                &mut applied,
            ),
            "numerics.eps_target",
        )?,
        eps_singular: positive(
            or_default(
                ns.eps_singular,
                DEFAULT_EPS_SINGULAR,
                "numerics.eps_singular",
                &mut applied,
            ),
            "numerics.eps_singular",
        )?,
        t_max: 1.0,
        integrator: ns.integrator.unwrap_or_else(|| {
            applied.push("numerics.integrator = \"euler\"".into());
            Integrator::Euler
        }),
        sample_stride: or_default(
            ns.sample_stride,
            DEFAULT_SAMPLE_STRIDE,
            "numerics.sample_stride",
            &mut applied,
        ),
    };

    let mut scenario = Scenario {
        graph,
        defender_speeds,
        intruder_speed,
        initial_state: AgentState::new(defenders, intruder_position),
        policy,
        target,
        numerics: num,
    };
    num.t_max = match ns.t_max {
        Some(t) => positive(t, "numerics.t_max")?,
        None => {
            let cm =
                build_capture_matrices(&scenario.graph).map_err(|e| graph_error(e, "graph"))?;
            let t = default_horizon(&scenario, &cm);
            applied.push(format!("numerics.t_max = {t}"));
            t
        }
    };
    scenario.numerics = num;
    if let IntruderPolicy::Scripted(s) = &scenario.policy {
        s.check_covers(num.t_max)
            .map_err(|e| ConfigError::invalid("intruder.schedule", e.to_string()))?;
    }
    scenario.validate()?;

    let experiment = experiment.unwrap_or_default();
    let grid = resolve_grid(experiment.grid.unwrap_or_default(), &mut applied)?;
    let sweep = experiment.sweep.map(|s| resolve_sweep(&s, n)).transpose()?;

    Ok(ScenarioConfig {
        scenario,
        grid,
        sweep,
        defaults_applied: applied,
    })
}

fn resolve_grid(g: GridSection, applied: &mut Vec<String>) -> Result<GridSpec, ConfigError> {
    let d = GridSpec::default();
    let grid = GridSpec {
        x_min: or_default(g.x_min, d.x_min, "experiment.grid.x_min", applied),
        x_max: or_default(g.x_max, d.x_max, "experiment.grid.x_max", applied),
        y_min: or_default(g.y_min, d.y_min, "experiment.grid.y_min", applied),
        y_max: or_default(g.y_max, d.y_max, "experiment.grid.y_max", applied),
        nx: or_default(g.nx, d.nx, "experiment.grid.nx", applied),
        ny: or_default(g.ny, d.ny, "experiment.grid.ny", applied),
        t_max: or_default(g.t_max, d.t_max, "experiment.grid.t_max", applied),
    };
    grid.validate()
        .map_err(|e| ConfigError::invalid("experiment.grid", e.to_string()))?;
    Ok(grid)
}

fn resolve_sweep(s: &SweepSection, n: usize) -> Result<SweepParameter, ConfigError> {
    let non_empty = |len: usize, key: &str| {
        if len == 0 {
            Err(ConfigError::invalid(
                format!("experiment.sweep.{key}"),
                "needs at least one setting",
            ))
        } else {
            Ok(())
        }
    };
    match s.parameter.as_str() {
        "defender_speed" => {
            let defender = s
                .defender
                .ok_or_else(|| ConfigError::MissingKey("experiment.sweep.defender".into()))?;
            if defender == 0 || defender > n {
                return Err(ConfigError::invalid(
                    "experiment.sweep.defender",
                    format!("defender indices are 1-based and at most {n}"),
                ));
            }
            let values = s
                .speeds
                .clone()
                .ok_or_else(|| ConfigError::MissingKey("experiment.sweep.speeds".into()))?;
            non_empty(values.len(), "speeds")?;
            for (k, &v) in values.iter().enumerate() {
                speed(v, format!("experiment.sweep.speeds[{k}]"))?;
            }
            Ok(SweepParameter::DefenderSpeed {
                defender: defender - 1,
                values,
            })
        }
        "sensing" => {
            let sets = s
                .sensing
                .as_ref()
                .ok_or_else(|| ConfigError::MissingKey("experiment.sweep.sensing".into()))?;
            non_empty(sets.len(), "sensing")?;
            let values = sets
                .iter()
                .enumerate()
                .map(|(k, b)| sensing_flags(b, n, &format!("experiment.sweep.sensing[{k}]")))
                .collect::<Result<_, _>>()?;
            Ok(SweepParameter::Sensing { values })
        }
        "comm_edges" => {
            let sets = s
                .edge_sets
                .as_ref()
                .ok_or_else(|| ConfigError::MissingKey("experiment.sweep.edge_sets".into()))?;
            non_empty(sets.len(), "edge_sets")?;
            let values = sets
                .iter()
                .enumerate()
                .map(|(k, e)| edges_from(e, n, &format!("experiment.sweep.edge_sets[{k}]")))
                .collect::<Result<_, _>>()?;
            Ok(SweepParameter::CommEdges { values })
        }
        other => Err(ConfigError::invalid(
            "experiment.sweep.parameter",
            format!("unknown parameter `{other}`, expected defender_speed, sensing or comm_edges"),
        )),
    }
}

fn edge_entries(edges: &[Edge]) -> Vec<EdgeEntry> {
    edges
        .iter()
        .map(|e| EdgeEntry {
            i: e.i + 1,
            j: e.j + 1,
            w: e.weight,
        })
        .collect()
}

fn flags(b: &[bool]) -> Vec<u8> {
    b.iter().map(|&v| v as u8).collect()
}

impl ScenarioConfig {
    /// The resolved document with every default written out. Parsing it yields `self`
    /// back, minus the record of which defaults were applied.
    pub fn echo(&self) -> String {
        let s = &self.scenario;
        let (policy, schedule) = match &s.policy {
            IntruderPolicy::Direct => ("direct", None),
            IntruderPolicy::Scripted(sch) => ("scripted", Some(sch.segments().to_vec())),
            // custom policies cannot be expressed in a document
            IntruderPolicy::Custom(_) => ("custom", None),
        };
        let sweep = self.sweep.as_ref().map(|p| match p {
            SweepParameter::DefenderSpeed { defender, values } => SweepSection {
                parameter: "defender_speed".into(),
                defender: Some(defender + 1),
                speeds: Some(values.clone()),
                sensing: None,
                edge_sets: None,
            },
            SweepParameter::Sensing { values } => SweepSection {
                parameter: "sensing".into(),
                defender: None,
                speeds: None,
                sensing: Some(values.iter().map(|b| flags(b)).collect()),
                edge_sets: None,
            },
            SweepParameter::CommEdges { values } => SweepSection {
                parameter: "comm_edges".into(),
                defender: None,
                speeds: None,
                sensing: None,
                edge_sets: Some(values.iter().map(|e| edge_entries(e)).collect()),
            },
        });
        let g = &self.grid;
        let n = &s.numerics;
        let file = ScenarioFile {
            agents: AgentsSection {
                positions: s
                    .initial_state
                    .defenders
                    .iter()
                    .map(|&p| p.into())
                    .collect(),
                speeds: s.defender_speeds.clone(),
            },
            graph: GraphSection {
                sensing: flags(s.graph.sensing()),
                edges: Some(edge_entries(&s.graph.edges())),
                adjacency: None,
            },
            intruder: IntruderSection {
                position: s.initial_state.intruder.into(),
                speed: s.intruder_speed,
                policy: Some(policy.into()),
                schedule,
            },
            target: Some(TargetSection {
                position: s.target.into(),
            }),
            numerics: Some(NumericsSection {
                dt: Some(n.dt),
                eps_capture: Some(n.eps_capture),
                eps_target: Some(n.eps_target),
                eps_singular: Some(n.eps_singular),
                t_max: Some(n.t_max),
                integrator: Some(n.integrator),
                sample_stride: Some(n.sample_stride),
            }),
            experiment: Some(ExperimentSection {
                grid: Some(GridSection {
                    x_min: Some(g.x_min),
                    x_max: Some(g.x_max),
                    y_min: Some(g.y_min),
                    y_max: Some(g.y_max),
                    nx: Some(g.nx),
                    ny: Some(g.ny),
                    t_max: Some(g.t_max),
                }),
                sweep,
            }),
        };
        toml::to_string(&file).expect("scenario documents always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[agents]
positions = [[5, 5], [-5, -5], [-5, 5], [5, -5]]
speeds = [1, 1, 1, 1]

[graph]
sensing = [1, 1, 1, 1]
edges = [{ i = 1, j = 2 }, { i = 1, j = 3 }, { i = 1, j = 4 }, { i = 2, j = 3 }, { i = 2, j = 4 }, { i = 3, j = 4 }]

[intruder]
position = [-5, 10]
speed = 0.1
"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_scenario(MINIMAL).unwrap();
        let n = &cfg.scenario.numerics;
        assert_eq!(n.dt, 1e-3);
        assert_eq!(n.eps_capture, 0.05);
        assert!((n.t_max - 4.0 * 1500f64.sqrt() / 0.8).abs() < 1e-9);
        assert!(cfg
            .defaults_applied
            .iter()
            .any(|d| d == "numerics.dt = 0.001"));
        assert!(cfg
            .defaults_applied
            .iter()
            .any(|d| d == "numerics.eps_capture = 0.05"));
        assert!(cfg
            .defaults_applied
            .iter()
            .any(|d| d.starts_with("numerics.t_max = ")));
        assert_eq!(cfg.scenario.policy, IntruderPolicy::Direct);
        assert_eq!(cfg.grid, GridSpec::default());
        assert!(cfg.echo().contains("dt = 0.001"));
    }

    #[test]
    fn echo_round_trips() {
        let cfg = parse_scenario(MINIMAL).unwrap();
        let again = parse_scenario(&cfg.echo()).unwrap();
        assert_eq!(again.scenario, cfg.scenario);
        assert_eq!(again.grid, cfg.grid);
        assert!(
            again.defaults_applied.is_empty(),
            "{:?}",
            again.defaults_applied
        );
        assert_eq!(again.echo(), cfg.echo());
    }

    #[test]
    fn unknown_key_names_its_path() {
        let doc = MINIMAL.replace("speed = 0.1", "speed = 0.1\nsped = 3");
        match parse_scenario(&doc) {
            Err(ConfigError::UnknownKey { path }) => assert_eq!(path, "intruder.sped"),
            other => panic!("{other:?}"),
        }
        let doc = format!("{MINIMAL}\n[numerics]\ndtt = 0.1\n");
        match parse_scenario(&doc) {
            Err(ConfigError::UnknownKey { path }) => assert_eq!(path, "numerics.dtt"),
            other => panic!("{other:?}"),
        }
        let doc = MINIMAL.replace("{ i = 1, j = 2 }", "{ i = 1, j = 2, weight = 2 }");
        match parse_scenario(&doc) {
            Err(ConfigError::UnknownKey { path }) => assert_eq!(path, "graph.edges[0].weight"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_section() {
        let doc = MINIMAL.replace("[intruder]\nposition = [-5, 10]\nspeed = 0.1\n", "");
        assert!(matches!(
            parse_scenario(&doc),
            Err(ConfigError::MissingSection("intruder"))
        ));
    }

    #[test]
    fn asymmetric_adjacency_names_entry() {
        let doc = MINIMAL.replace(
            "edges = [{ i = 1, j = 2 }, { i = 1, j = 3 }, { i = 1, j = 4 }, { i = 2, j = 3 }, { i = 2, j = 4 }, { i = 3, j = 4 }]",
            "adjacency = [[0, 2, 1, 1], [1, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]]",
        );
        match parse_scenario(&doc) {
            Err(e @ ConfigError::AsymmetricWeights { i: 1, j: 2, .. }) => {
                assert!(e.to_string().contains("(1, 2)"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conflicting_edge_weights_are_asymmetric() {
        let doc = MINIMAL.replace(
            "{ i = 1, j = 2 }",
            "{ i = 1, j = 2, w = 1 }, { i = 2, j = 1, w = 3 }",
        );
        assert!(matches!(
            parse_scenario(&doc),
            Err(ConfigError::AsymmetricWeights { i: 2, j: 1, .. })
        ));
    }

    #[test]
    fn non_positive_speed() {
        let doc = MINIMAL.replace("speeds = [1, 1, 1, 1]", "speeds = [1, 1, 0, 1]");
        match parse_scenario(&doc) {
            Err(ConfigError::NonPositiveSpeed { path, value }) => {
                assert_eq!(path, "agents.speeds[2]");
                assert_eq!(value, 0.0);
            }
            other => panic!("{other:?}"),
        }
        let doc = MINIMAL.replace("speed = 0.1", "speed = -0.1");
        assert!(matches!(
            parse_scenario(&doc),
            Err(ConfigError::NonPositiveSpeed { .. })
        ));
    }

    #[test]
    fn scripted_policy_needs_covering_schedule() {
        let doc = MINIMAL.replace(
            "speed = 0.1",
            "speed = 0.1\npolicy = \"scripted\"\nschedule = [{ start = 0, end = 10, heading = 0.5 }]\n[numerics]\nt_max = 20",
        );
        assert!(
            matches!(parse_scenario(&doc), Err(ConfigError::Invalid { path, .. }) if path == "intruder.schedule")
        );
        let ok = doc.replace("end = 10", "end = 20");
        let cfg = parse_scenario(&ok).unwrap();
        assert!(matches!(cfg.scenario.policy, IntruderPolicy::Scripted(_)));
        assert_eq!(parse_scenario(&cfg.echo()).unwrap().scenario, cfg.scenario);
    }

    #[test]
    fn garbage_is_a_syntax_error() {
        assert!(matches!(
            parse_scenario("[agents\npositions = "),
            Err(ConfigError::Syntax(_))
        ));
        assert!(matches!(
            parse_scenario("agents = 3"),
            Err(ConfigError::Invalid { .. })
        ));
    }

    #[test]
    fn sweep_section() {
        let doc = format!(
            "{MINIMAL}\n[experiment.sweep]\nparameter = \"defender_speed\"\ndefender = 4\nspeeds = [0.2, 0.4]\n"
        );
        let cfg = parse_scenario(&doc).unwrap();
        assert_eq!(
            cfg.sweep,
            Some(SweepParameter::DefenderSpeed {
                defender: 3,
                values: vec![0.2, 0.4]
            })
        );
        assert_eq!(parse_scenario(&cfg.echo()).unwrap().sweep, cfg.sweep);
        let bad = doc.replace("defender = 4", "defender = 5");
        assert!(parse_scenario(&bad).is_err());
    }
}
