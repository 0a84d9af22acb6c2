//! Piecewise-constant staffing schedule c(t).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StaffingError {
    #[error("staffing schedule has no breakpoints")]
    Empty,
    #[error("breakpoint times must be strictly increasing (at index {0})")]
    NotIncreasing(usize),
    #[error("breakpoint time at index {0} is not finite")]
    NonFinite(usize),
}

/// Open-desk count as a step function of time. The last breakpoint's count
/// holds indefinitely; the schedule is undefined before the first breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaffingSchedule {
    breakpoints: Vec<(f64, u32)>,
}

impl StaffingSchedule {
    pub fn new(breakpoints: Vec<(f64, u32)>) -> Result<Self, StaffingError> {
        if breakpoints.is_empty() {
            return Err(StaffingError::Empty);
        }
        for (i, &(t, _)) in breakpoints.iter().enumerate() {
            if !t.is_finite() {
                return Err(StaffingError::NonFinite(i));
            }
            if i > 0 && t <= breakpoints[i - 1].0 {
                return Err(StaffingError::NotIncreasing(i));
            }
        }
        Ok(StaffingSchedule { breakpoints })
    }

    /// A schedule with a single level starting at `start`.
    pub fn constant(start: f64, desks: u32) -> Self {
        StaffingSchedule { breakpoints: vec![(start, desks)] }
    }

    pub fn breakpoints(&self) -> &[(f64, u32)] {
        &self.breakpoints
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0].0
    }

    pub fn covers(&self, t: f64) -> bool {
        t >= self.start()
    }

    /// c(t), or `None` before the first breakpoint.
    pub fn desks_at(&self, t: f64) -> Option<u32> {
        let idx = self.breakpoints.partition_point(|&(start, _)| start <= t);
        idx.checked_sub(1).map(|i| self.breakpoints[i].1)
    }
}
