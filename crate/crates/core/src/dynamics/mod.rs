//! Agent motion: the defenders' normalized consensus law, the intruder with its
//! capture indicator, fixed-step integration and event detection.
//!
//! Defender `i` moves at constant speed `v_i` along
//!
//! ```text
//! d_i = Σ_j w_ij (x_j - x_i) + b_i (x_I - x_i)
//! ```
//!
//! and the intruder moves at `v_I` along its policy heading until every
//! defender is within the capture radius, after which it stops.

mod policy;

pub use policy::{
    intruder_heading, HeadingPolicy, HeadingSchedule, HeadingSegment, IntruderPolicy,
};

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::geometry::Point;
use crate::graph::{build_capture_matrices, validate_assumptions, CaptureMatrixSet, CommGraph};

/// Positions of all agents at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub defenders: Vec<Point>,
    pub intruder: Point,
    pub time: f64,
    /// Mirror of the capture indicator: set once `Σ_i ‖x_i - x_I‖ ≤ N·ε_cap`.
    pub captured: bool,
}

impl AgentState {
    pub fn new(defenders: Vec<Point>, intruder: Point) -> Self {
        Self {
            defenders,
            intruder,
            time: 0.0,
            captured: false,
        }
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub fn n_defenders(&self) -> usize {
        self.defenders.len()
    }

    /// Consensus errors `ξ_i = x_i - x_I`.
    pub fn consensus_errors(&self) -> impl Iterator<Item = Point> + '_ {
        self.defenders.iter().map(move |&p| p - self.intruder)
    }

    /// `Σ_i ‖x_i - x_I‖`.
    pub fn total_distance(&self) -> f64 {
        self.consensus_errors().map(Point::norm).sum()
    }

    /// Largest single defender-intruder distance.
    pub fn max_distance(&self) -> f64 {
        self.consensus_errors().map(Point::norm).fold(0.0, f64::max)
    }

    fn translated(&self, by: Point) -> Self {
        Self {
            defenders: self.defenders.iter().map(|&p| p + by).collect(),
            intruder: self.intruder + by,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Euler,
    Rk4,
}

/// Step size, event radii and horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub dt: f64,
    pub eps_capture: f64,
    pub eps_target: f64,
    pub eps_singular: f64,
    pub t_max: f64,
    pub integrator: Integrator,
    /// Record every `sample_stride`-th step; 0 keeps only the first and last sample.
    pub sample_stride: usize,
}

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_EPS_CAPTURE: f64 = 0.05;
pub const DEFAULT_EPS_TARGET: f64 = 0.05;
pub const DEFAULT_EPS_SINGULAR: f64 = 1e-9;
/// Horizon used when no finite capture-time certificate exists.
pub const DEFAULT_T_MAX: f64 = 200.0;
pub const DEFAULT_SAMPLE_STRIDE: usize = 10;

impl Default for Numerics {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            eps_capture: DEFAULT_EPS_CAPTURE,
            eps_target: DEFAULT_EPS_TARGET,
            eps_singular: DEFAULT_EPS_SINGULAR,
            t_max: DEFAULT_T_MAX,
            integrator: Integrator::Euler,
            sample_stride: DEFAULT_SAMPLE_STRIDE,
        }
    }
}

impl Numerics {
    /// Slack allowed on `√V(t) ≤ √V(0) - c·t` for a discrete trace: `10·c·dt`.
    pub fn rate_slack(&self, c: f64) -> f64 {
        10.0 * c * self.dt
    }
}

/// Everything needed to run one engagement.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph: CommGraph,
    pub defender_speeds: Vec<f64>,
    pub intruder_speed: f64,
    pub initial_state: AgentState,
    pub policy: IntruderPolicy,
    pub target: Point,
    pub numerics: Numerics,
}

impl Scenario {
    pub fn n_defenders(&self) -> usize {
        self.graph.n_defenders()
    }

    pub fn min_defender_speed(&self) -> f64 {
        self.defender_speeds
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks lengths, speeds, numerics and schedule coverage. Does not check the
    /// connectivity and sensing assumptions; see [`crate::graph::validate_assumptions`].
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.n_defenders();
        if self.defender_speeds.len() != n {
            return Err(ScenarioError::Length {
                what: "defender speeds",
                got: self.defender_speeds.len(),
                expected: n,
            });
        }
        if self.initial_state.defenders.len() != n {
            return Err(ScenarioError::Length {
                what: "defender positions",
                got: self.initial_state.defenders.len(),
                expected: n,
            });
        }
        for (index, &value) in self.defender_speeds.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(ScenarioError::DefenderSpeed { index, value });
            }
        }
        if !(self.intruder_speed.is_finite() && self.intruder_speed > 0.0) {
            return Err(ScenarioError::IntruderSpeed(self.intruder_speed));
        }
        if !self.initial_state.defenders.iter().all(|p| p.is_finite()) {
            return Err(ScenarioError::NonFinitePosition("defender positions"));
        }
        if !self.initial_state.intruder.is_finite() {
            return Err(ScenarioError::NonFinitePosition("intruder position"));
        }
        if !self.target.is_finite() {
            return Err(ScenarioError::NonFinitePosition("target"));
        }
        let num = &self.numerics;
        for (name, value) in [
            ("dt", num.dt),
            ("eps_capture", num.eps_capture),
            ("eps_target", num.eps_target),
            ("eps_singular", num.eps_singular),
            ("t_max", num.t_max),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ScenarioError::Numerics { name, value });
            }
        }
        if let IntruderPolicy::Scripted(s) = &self.policy {
            s.check_covers(num.t_max)?;
        }
        Ok(())
    }

    /// Same scenario with every position and the target shifted by `by`.
    pub fn translated(&self, by: Point) -> Self {
        Self {
            initial_state: self.initial_state.translated(by),
            target: self.target + by,
            ..self.clone()
        }
    }

    /// Same scenario with the intruder starting at `p`.
    pub fn with_intruder_at(&self, p: Point) -> Self {
        let mut s = self.clone();
        s.initial_state.intruder = p;
        s
    }
}

/// Unnormalized consensus direction `d_i` for defender `i`.
#[inline]
fn consensus_direction(
    i: usize,
    defenders: &[Point],
    intruder: Point,
    cm: &CaptureMatrixSet,
) -> Point {
    let xi = defenders[i];
    let mut d = Point::ORIGIN;
    for (j, &xj) in defenders.iter().enumerate() {
        if j != i {
            let w = cm.weight(i, j);
            if w != 0.0 {
                d += w * (xj - xi);
            }
        }
    }
    if cm.sensing()[i] {
        d += intruder - xi;
    }
    d
}

/// Velocity of defender `i`: `v_i · d_i / ‖d_i‖`, or zero when `‖d_i‖ ≤ eps_singular`.
pub fn defender_velocity(
    i: usize,
    state: &AgentState,
    cm: &CaptureMatrixSet,
    speed: f64,
    eps_singular: f64,
) -> Point {
    normalized(
        consensus_direction(i, &state.defenders, state.intruder, cm),
        speed,
        eps_singular,
    )
}

#[inline]
fn normalized(d: Point, speed: f64, eps_singular: f64) -> Point {
    let norm = d.norm();
    if norm <= eps_singular {
        Point::ORIGIN
    } else {
        (speed / norm) * d
    }
}

/// `true` when the capture indicator is zero: `Σ_i ‖x_i - x_I‖ ≤ N·ε_cap`.
#[inline]
pub fn intruder_stopped(defenders: &[Point], intruder: Point, eps_capture: f64) -> bool {
    let total: f64 = defenders.iter().map(|&p| p.distance(intruder)).sum();
    total <= defenders.len() as f64 * eps_capture
}

/// Intruder velocity `δ · v · (cos θ, sin θ)`.
pub fn intruder_velocity(state: &AgentState, heading: f64, speed: f64, eps_capture: f64) -> Point {
    if intruder_stopped(&state.defenders, state.intruder, eps_capture) {
        Point::ORIGIN
    } else {
        speed * Point::from_angle(heading)
    }
}

/// `V = ξᵀ(W ⊗ I₂)ξ = Σ_ij W_ij ξ_i·ξ_j`.
pub fn lyapunov_value(state: &AgentState, cm: &CaptureMatrixSet) -> f64 {
    let xi: Vec<Point> = state.consensus_errors().collect();
    let n = xi.len();
    let mut v = 0.0;
    for i in 0..n {
        let row = cm.w_full.row(i);
        for j in 0..n {
            if row[j] != 0.0 {
                v += row[j] * xi[i].dot(xi[j]);
            }
        }
    }
    v.max(0.0)
}

/// Fills `out` with defender velocities and returns the intruder velocity.
fn rates(
    state: &AgentState,
    scenario: &Scenario,
    cm: &CaptureMatrixSet,
    out: &mut Vec<Point>,
) -> Point {
    let eps = scenario.numerics.eps_singular;
    out.clear();
    out.extend((0..state.defenders.len()).map(|i| {
        normalized(
            consensus_direction(i, &state.defenders, state.intruder, cm),
            scenario.defender_speeds[i],
            eps,
        )
    }));
    if intruder_stopped(
        &state.defenders,
        state.intruder,
        scenario.numerics.eps_capture,
    ) {
        return Point::ORIGIN;
    }
    match scenario.policy {
        // same direction as atan2 followed by (cos, sin), without the trigonometry
        IntruderPolicy::Direct => {
            let d = scenario.target - state.intruder;
            let norm = d.norm();
            if norm == 0.0 {
                Point::new(scenario.intruder_speed, 0.0)
            } else {
                (scenario.intruder_speed / norm) * d
            }
        }
        _ => {
            let heading = intruder_heading(state, &scenario.policy, scenario.target);
            scenario.intruder_speed * Point::from_angle(heading)
        }
    }
}

/// Scratch buffers reused across steps.
#[derive(Default)]
struct Workspace {
    k: [Vec<Point>; 4],
    stage: Option<AgentState>,
}

fn advance(
    state: &mut AgentState,
    new_time: f64,
    scenario: &Scenario,
    cm: &CaptureMatrixSet,
    ws: &mut Workspace,
) {
    let dt = scenario.numerics.dt;
    match scenario.numerics.integrator {
        Integrator::Euler => {
            let vi = rates(state, scenario, cm, &mut ws.k[0]);
            for (p, v) in state.defenders.iter_mut().zip(&ws.k[0]) {
                *p += dt * *v;
            }
            state.intruder += dt * vi;
        }
        Integrator::Rk4 => {
            let stage = ws.stage.get_or_insert_with(|| state.clone());
            let mut iv = [Point::ORIGIN; 4];
            let offsets = [0.0, 0.5 * dt, 0.5 * dt, dt];
            for s in 0..4 {
                stage.clone_from(state);
                if s > 0 {
                    let h = offsets[s];
                    for (p, v) in stage.defenders.iter_mut().zip(&ws.k[s - 1]) {
                        *p += h * *v;
                    }
                    stage.intruder += h * iv[s - 1];
                    stage.time = state.time + h;
                }
                iv[s] = rates(stage, scenario, cm, &mut ws.k[s]);
            }
            let w = dt / 6.0;
            for (i, p) in state.defenders.iter_mut().enumerate() {
                let v = ws.k[0][i] + 2.0 * ws.k[1][i] + 2.0 * ws.k[2][i] + ws.k[3][i];
                *p += w * v;
            }
            state.intruder += w * (iv[0] + 2.0 * iv[1] + 2.0 * iv[2] + iv[3]);
        }
    }
    state.time = new_time;
    state.captured = intruder_stopped(
        &state.defenders,
        state.intruder,
        scenario.numerics.eps_capture,
    );
}

/// Advances every agent by one step of the configured integrator.
pub fn step(state: &AgentState, scenario: &Scenario, cm: &CaptureMatrixSet) -> AgentState {
    let mut next = state.clone();
    advance(
        &mut next,
        state.time + scenario.numerics.dt,
        scenario,
        cm,
        &mut Workspace::default(),
    );
    next
}

/// How an engagement ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "time", rename_all = "snake_case")]
pub enum Outcome {
    SimultaneousCapture(f64),
    Breach(f64),
    Timeout(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeClass {
    Capture,
    Breach,
    Timeout,
}

impl Outcome {
    pub fn time(&self) -> f64 {
        match *self {
            Outcome::SimultaneousCapture(t) | Outcome::Breach(t) | Outcome::Timeout(t) => t,
        }
    }

    pub fn class(&self) -> OutcomeClass {
        match self {
            Outcome::SimultaneousCapture(_) => OutcomeClass::Capture,
            Outcome::Breach(_) => OutcomeClass::Breach,
            Outcome::Timeout(_) => OutcomeClass::Timeout,
        }
    }

    pub fn capture_time(&self) -> Option<f64> {
        match *self {
            Outcome::SimultaneousCapture(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub time: f64,
    pub defenders: Vec<Point>,
    pub intruder: Point,
    pub lyapunov: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub samples: Vec<TraceSample>,
    pub outcome: Outcome,
    pub dt: f64,
    /// Number of integration steps taken.
    pub steps: usize,
}

impl SimulationTrace {
    pub fn final_sample(&self) -> &TraceSample {
        self.samples
            .last()
            .expect("trace always holds the initial sample")
    }

    pub fn final_state(&self) -> AgentState {
        let s = self.final_sample();
        AgentState {
            defenders: s.defenders.clone(),
            intruder: s.intruder,
            time: s.time,
            captured: matches!(self.outcome, Outcome::SimultaneousCapture(_)),
        }
    }
}

/// Runs until simultaneous capture, breach or the horizon, after checking the
/// connectivity and sensing assumptions.
pub fn simulate(scenario: &Scenario) -> Result<SimulationTrace, ScenarioError> {
    let report = validate_assumptions(&scenario.graph);
    if !report.all_pass() {
        return Err(ScenarioError::Assumptions(report.failures().join("; ")));
    }
    simulate_unchecked(scenario)
}

/// Like [`simulate`] but without the assumption check, for studying violations.
pub fn simulate_unchecked(scenario: &Scenario) -> Result<SimulationTrace, ScenarioError> {
    scenario.validate()?;
    let cm = build_capture_matrices(&scenario.graph)?;
    Ok(run(scenario, &cm))
}

/// Event time for a condition first observed after `k` steps: the midpoint of step `k`.
#[inline]
fn event_time(k: usize, dt: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        (k as f64 - 0.5) * dt
    }
}

pub(crate) fn run(scenario: &Scenario, cm: &CaptureMatrixSet) -> SimulationTrace {
    let num = &scenario.numerics;
    let dt = num.dt;
    let mut state = scenario.initial_state.clone();
    state.time = 0.0;
    state.captured = intruder_stopped(&state.defenders, state.intruder, num.eps_capture);
    let mut ws = Workspace::default();
    let mut samples = Vec::new();
    let sample = |s: &AgentState| TraceSample {
        time: s.time,
        defenders: s.defenders.clone(),
        intruder: s.intruder,
        lyapunov: lyapunov_value(s, cm),
    };

    let mut k = 0usize;
    let outcome = loop {
        let t = k as f64 * dt;
        let all_close = state
            .defenders
            .iter()
            .all(|p| p.distance(state.intruder) <= num.eps_capture);
        let event = if all_close {
            Some(Outcome::SimultaneousCapture(event_time(k, dt)))
        } else if state.intruder.distance(scenario.target) <= num.eps_target {
            Some(Outcome::Breach(event_time(k, dt)))
        } else if t >= num.t_max - 0.5 * dt {
            Some(Outcome::Timeout(t))
        } else {
            None
        };
        let stride_hit = k == 0 || (num.sample_stride > 0 && k.is_multiple_of(num.sample_stride));
        if stride_hit || event.is_some() {
            samples.push(sample(&state));
        }
        if let Some(o) = event {
            break o;
        }
        k += 1;
        advance(&mut state, k as f64 * dt, scenario, cm, &mut ws);
    };

    SimulationTrace {
        samples,
        outcome,
        dt,
        steps: k,
    }
}
