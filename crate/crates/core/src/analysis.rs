//! Capture certificates: the Lyapunov capture-time bound, the sufficient
//! capture conditions derived from it, and post-hoc checking of the
//! `√V(t) ≤ √V(0) - c·t` rate inequality on simulated traces.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{lyapunov_value, Outcome, Scenario, SimulationTrace, DEFAULT_T_MAX};
use crate::error::BoundError;
use crate::graph::{lemma1_lower_bound, lemma_coefficients, minimize_gamma, CaptureMatrixSet};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum AnalysisError {
    #[error("intruder starts within the target radius; the time-to-target is zero")]
    Degenerate,
    #[error(transparent)]
    Infeasible(#[from] BoundError),
}

/// A boolean condition together with its margin (positive when it holds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub slack: f64,
}

impl ConditionCheck {
    fn from_slack(slack: f64) -> Self {
        Self {
            holds: slack >= 0.0,
            slack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaptureCertificate {
    /// `v_min √λ_min(W) - v_I √m`.
    pub c: f64,
    /// `V(0) = ξ(0)ᵀ(W ⊗ I₂)ξ(0)`.
    pub v0: f64,
    pub lambda_min_w: f64,
    pub lambda2_w1: Option<f64>,
    pub lemma_lower_bound: Option<f64>,
    pub sensing_count: usize,
    pub v_min: f64,
    pub intruder_speed: f64,
    /// `√V(0) / c`, present only when `c > 0`.
    pub t_star_bound: Option<f64>,
    /// Time-to-target form; `None` when the intruder starts on the target.
    pub sufficient_capture: Option<ConditionCheck>,
    /// Speed-ratio form; `None` when the intruder starts on the target.
    pub speed_ratio_ok: Option<ConditionCheck>,
    /// Speed condition using the λ_min lower bound; `None` when that bound is unavailable.
    pub lemma_speed_ok: Option<ConditionCheck>,
}

impl CaptureCertificate {
    pub fn is_feasible(&self) -> bool {
        self.t_star_bound.is_some()
    }
}

/// `c = v_min √λ_min(W) - v_I √m`.
pub fn rate_constant(scenario: &Scenario, cm: &CaptureMatrixSet) -> f64 {
    scenario.min_defender_speed() * cm.lambda_min_w.max(0.0).sqrt()
        - scenario.intruder_speed * (cm.m as f64).sqrt()
}

/// Upper bound on the capture time, `√V(0) / c`, or `None` when `c ≤ 0`.
pub fn capture_time_bound(scenario: &Scenario, cm: &CaptureMatrixSet) -> Option<f64> {
    let c = rate_constant(scenario, cm);
    (c > 0.0).then(|| lyapunov_value(&scenario.initial_state, cm).sqrt() / c)
}

/// Default horizon: four times the capture-time bound when it is finite and
/// positive, [`DEFAULT_T_MAX`] otherwise.
pub fn default_horizon(scenario: &Scenario, cm: &CaptureMatrixSet) -> f64 {
    match capture_time_bound(scenario, cm) {
        Some(b) if b.is_finite() && b > 0.0 => 4.0 * b,
        _ => DEFAULT_T_MAX,
    }
}

/// Both forms of the time-to-target sufficient condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SufficientCondition {
    /// `√V(0) / (‖x_I(0) - T‖ / v_I) ≤ c`; slack is `c - lhs`.
    pub time_form: ConditionCheck,
    /// `v_min / v_I ≥ α / √λ_min(W)`; slack is the difference of the two sides.
    pub ratio_form: ConditionCheck,
    pub lhs: f64,
    /// `α = √V(0)/‖x_I(0) - T‖ + √m`.
    pub alpha: f64,
}

fn target_distance(scenario: &Scenario) -> Result<f64, AnalysisError> {
    let dist = scenario.initial_state.intruder.distance(scenario.target);
    if dist <= scenario.numerics.eps_target {
        Err(AnalysisError::Degenerate)
    } else {
        Ok(dist)
    }
}

fn alpha(scenario: &Scenario, cm: &CaptureMatrixSet, dist: f64) -> f64 {
    lyapunov_value(&scenario.initial_state, cm).sqrt() / dist + (cm.m as f64).sqrt()
}

/// Sufficient condition for capture before the intruder can reach the target.
pub fn sufficient_condition_capture(
    scenario: &Scenario,
    cm: &CaptureMatrixSet,
) -> Result<SufficientCondition, AnalysisError> {
    let dist = target_distance(scenario)?;
    let vi = scenario.intruder_speed;
    let c = rate_constant(scenario, cm);
    let sqrt_v0 = lyapunov_value(&scenario.initial_state, cm).sqrt();
    let lhs = sqrt_v0 / (dist / vi);
    let alpha = alpha(scenario, cm, dist);
    let ratio_lhs = scenario.min_defender_speed() / vi;
    let ratio_rhs = alpha / cm.lambda_min_w.max(0.0).sqrt();
    Ok(SufficientCondition {
        time_form: ConditionCheck::from_slack(c - lhs),
        ratio_form: ConditionCheck::from_slack(ratio_lhs - ratio_rhs),
        lhs,
        alpha,
    })
}

/// Speed condition phrased through the algebraic connectivity λ₂(W₁).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaSpeedCondition {
    pub check: ConditionCheck,
    /// `min_γ (λ₂(W₁)/m + (1/N)(|γ| - √((N-m)/m))²) / (γ² + 1)`.
    pub min_term: f64,
    pub alpha: f64,
}

/// Checks `v_min² · min_term ≥ v_I² α²`; slack is `lhs - rhs`.
pub fn speed_condition_lemma(
    scenario: &Scenario,
    cm: &CaptureMatrixSet,
) -> Result<LemmaSpeedCondition, AnalysisError> {
    if cm.m == 0 {
        return Err(BoundError::NoSensing.into());
    }
    let dist = target_distance(scenario)?;
    let m = cm.m as f64;
    let min_term = if cm.n == 1 {
        lemma1_lower_bound(cm)? / m
    } else {
        if !cm.connected {
            return Err(BoundError::Disconnected.into());
        }
        let (a, _, d) = lemma_coefficients(cm);
        minimize_gamma(a / m, 1.0 / cm.n as f64, d).value
    };
    let alpha = alpha(scenario, cm, dist);
    let v_min = scenario.min_defender_speed();
    let vi = scenario.intruder_speed;
    let lhs = v_min * v_min * min_term;
    let rhs = vi * vi * alpha * alpha;
    Ok(LemmaSpeedCondition {
        check: ConditionCheck::from_slack(lhs - rhs),
        min_term,
        alpha,
    })
}

/// Evaluates every certificate field.
pub fn certify(scenario: &Scenario, cm: &CaptureMatrixSet) -> CaptureCertificate {
    let sufficient = sufficient_condition_capture(scenario, cm).ok();
    CaptureCertificate {
        c: rate_constant(scenario, cm),
        v0: lyapunov_value(&scenario.initial_state, cm),
        lambda_min_w: cm.lambda_min_w,
        lambda2_w1: cm.lambda2_w1,
        lemma_lower_bound: lemma1_lower_bound(cm).ok(),
        sensing_count: cm.m,
        v_min: scenario.min_defender_speed(),
        intruder_speed: scenario.intruder_speed,
        t_star_bound: capture_time_bound(scenario, cm),
        sufficient_capture: sufficient.map(|s| s.time_form),
        speed_ratio_ok: sufficient.map(|s| s.ratio_form),
        lemma_speed_ok: speed_condition_lemma(scenario, cm).ok().map(|l| l.check),
    }
}

/// Result of checking a trace against `√V(t) ≤ √V(0) - c·t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    /// `false` when `c ≤ 0`; the remaining fields are then zero.
    pub applicable: bool,
    pub max_violation: f64,
    pub time_of_max_violation: f64,
    pub tolerance: f64,
    pub samples_checked: usize,
    pub pass: bool,
    /// Set when the trace timed out although `c > 0`: the step or radii are too coarse.
    pub numerics_alert: bool,
}

/// Checks every sample taken before the capture instant.
///
/// `tolerance` is the discretization slack, normally [`crate::dynamics::Numerics::rate_slack`].
pub fn verify_consensus_rate(
    trace: &SimulationTrace,
    cert: &CaptureCertificate,
    tolerance: f64,
) -> RateReport {
    if cert.c <= 0.0 {
        return RateReport {
            applicable: false,
            max_violation: 0.0,
            time_of_max_violation: 0.0,
            tolerance,
            samples_checked: 0,
            pass: false,
            numerics_alert: false,
        };
    }
    let sqrt_v0 = trace.samples.first().map_or(cert.v0, |s| s.lyapunov).sqrt();
    let cutoff = trace.outcome.capture_time();
    let mut max_violation = f64::NEG_INFINITY;
    let mut time_of_max = 0.0;
    let mut checked = 0;
    for s in &trace.samples {
        if cutoff.is_some_and(|t| s.time >= t) {
            break;
        }
        let violation = s.lyapunov.sqrt() - (sqrt_v0 - cert.c * s.time);
        if violation > max_violation {
            max_violation = violation;
            time_of_max = s.time;
        }
        checked += 1;
    }
    if checked == 0 {
        max_violation = 0.0;
    }
    RateReport {
        applicable: true,
        max_violation,
        time_of_max_violation: time_of_max,
        tolerance,
        samples_checked: checked,
        pass: max_violation <= tolerance,
        numerics_alert: matches!(trace.outcome, Outcome::Timeout(_)),
    }
}
