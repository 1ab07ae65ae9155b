//! Intruder heading policies.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::geometry::Point;

use super::AgentState;

/// Tolerance on the seam between consecutive schedule segments.
const SEAM_TOLERANCE: f64 = 1e-12;

/// A user-provided heading rule. Receives the full joint state.
pub trait HeadingPolicy: Send + Sync + fmt::Debug {
    fn heading(&self, state: &AgentState, target: Point) -> f64;
}

/// Constant heading on `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadingSegment {
    pub start: f64,
    pub end: f64,
    pub heading: f64,
}

/// Piecewise-constant heading schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadingSchedule {
    segments: Vec<HeadingSegment>,
}

impl HeadingSchedule {
    /// Segments must start at zero, be contiguous and have `start < end`.
    pub fn new(segments: Vec<HeadingSegment>) -> Result<Self, ScenarioError> {
        let Some(first) = segments.first() else {
            return Err(ScenarioError::Schedule("schedule is empty".into()));
        };
        if first.start.abs() > SEAM_TOLERANCE {
            return Err(ScenarioError::Schedule(format!(
                "first segment starts at {} instead of 0",
                first.start
            )));
        }
        for (k, s) in segments.iter().enumerate() {
            if !(s.start.is_finite() && s.heading.is_finite()) || s.end.is_nan() {
                return Err(ScenarioError::Schedule(format!(
                    "segment {k} has a non-finite value"
                )));
            }
            if s.end <= s.start {
                return Err(ScenarioError::Schedule(format!(
                    "segment {k} is empty: [{}, {})",
                    s.start, s.end
                )));
            }
        }
        for (k, pair) in segments.windows(2).enumerate() {
            if (pair[1].start - pair[0].end).abs() > SEAM_TOLERANCE {
                return Err(ScenarioError::Schedule(format!(
                    "gap or overlap between segment {k} (ends {}) and segment {} (starts {})",
                    pair[0].end,
                    k + 1,
                    pair[1].start
                )));
            }
        }
        Ok(Self { segments })
    }

    /// A single segment covering `[0, ∞)`.
    pub fn constant(heading: f64) -> Self {
        Self {
            segments: vec![HeadingSegment {
                start: 0.0,
                end: f64::INFINITY,
                heading,
            }],
        }
    }

    pub fn segments(&self) -> &[HeadingSegment] {
        &self.segments
    }

    pub fn end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }

    /// Errors when the schedule stops before `t_max`.
    pub fn check_covers(&self, t_max: f64) -> Result<(), ScenarioError> {
        if self.end() + SEAM_TOLERANCE < t_max {
            return Err(ScenarioError::Schedule(format!(
                "schedule ends at {} but the horizon is {t_max}",
                self.end()
            )));
        }
        Ok(())
    }

    pub fn heading_at(&self, t: f64) -> f64 {
        let idx = self.segments.partition_point(|s| s.end <= t);
        self.segments
            .get(idx)
            .or(self.segments.last())
            .map_or(0.0, |s| s.heading)
    }
}

/// How the intruder picks its heading.
#[derive(Debug, Clone, Default)]
pub enum IntruderPolicy {
    /// Straight at the target at full speed.
    #[default]
    Direct,
    Scripted(HeadingSchedule),
    Custom(Arc<dyn HeadingPolicy>),
}

impl PartialEq for IntruderPolicy {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Direct, Self::Direct) => true,
            (Self::Scripted(a), Self::Scripted(b)) => a == b,
            (Self::Custom(a), Self::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// Heading of the intruder in radians.
///
/// `Direct` returns `atan2(T_y - y, T_x - x)`, and 0 when the intruder sits on the target.
pub fn intruder_heading(state: &AgentState, policy: &IntruderPolicy, target: Point) -> f64 {
    match policy {
        IntruderPolicy::Direct => {
            let d = target - state.intruder;
            if d.x == 0.0 && d.y == 0.0 {
                0.0
            } else {
                d.y.atan2(d.x)
            }
        }
        IntruderPolicy::Scripted(schedule) => schedule.heading_at(state.time),
        IntruderPolicy::Custom(p) => p.heading(state, target),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn state_with_intruder(p: Point, t: f64) -> AgentState {
        AgentState::new(vec![Point::ORIGIN], p).at_time(t)
    }

    #[test]
    fn direct_heading_toward_origin() {
        let th = intruder_heading(
            &state_with_intruder(Point::new(-5.0, 10.0), 0.0),
            &IntruderPolicy::Direct,
            Point::ORIGIN,
        );
        assert!((th - (-10.0f64).atan2(5.0)).abs() < 1e-15);
        assert!((th + 1.10715).abs() < 1e-5);
    }

    #[test]
    fn direct_heading_at_target_is_zero() {
        let p = Point::new(2.0, 3.0);
        let th = intruder_heading(&state_with_intruder(p, 0.0), &IntruderPolicy::Direct, p);
        assert_eq!(th, 0.0);
    }

    #[test]
    fn constant_schedule() {
        let policy = IntruderPolicy::Scripted(HeadingSchedule::constant(FRAC_PI_4));
        for t in [0.0, 1.5, 1e6] {
            let th = intruder_heading(
                &state_with_intruder(Point::ORIGIN, t),
                &policy,
                Point::ORIGIN,
            );
            assert_eq!(th, FRAC_PI_4);
        }
    }

    #[test]
    fn piecewise_lookup_uses_half_open_segments() {
        let s = HeadingSchedule::new(vec![
            HeadingSegment {
                start: 0.0,
                end: 1.0,
                heading: 0.1,
            },
            HeadingSegment {
                start: 1.0,
                end: 3.0,
                heading: 0.2,
            },
        ])
        .unwrap();
        assert_eq!(s.heading_at(0.0), 0.1);
        assert_eq!(s.heading_at(0.999), 0.1);
        assert_eq!(s.heading_at(1.0), 0.2);
        assert!(s.check_covers(3.0).is_ok());
        assert!(s.check_covers(3.5).is_err());
    }

    #[test]
    fn schedule_gap_is_rejected() {
        let err = HeadingSchedule::new(vec![
            HeadingSegment {
                start: 0.0,
                end: 1.0,
                heading: 0.1,
            },
            HeadingSegment {
                start: 1.5,
                end: 3.0,
                heading: 0.2,
            },
        ])
        .unwrap_err();
        assert!(err.to_string().contains("gap"));
        assert!(HeadingSchedule::new(vec![HeadingSegment {
            start: 0.5,
            end: 1.0,
            heading: 0.0
        }])
        .is_err());
        assert!(HeadingSchedule::new(vec![]).is_err());
    }
}
