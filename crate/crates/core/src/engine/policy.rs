use serde::{Deserialize, Serialize};

use super::EngineError;

/// Threshold staffing: open a desk when the queue reaches `upper`, close one
/// when it falls to `lower`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CongestionPolicy {
    pub upper: usize,
    pub lower: usize,
    pub min_desks: u32,
    pub max_desks: u32,
    pub initial_desks: u32,
    /// Seconds between policy reviews.
    pub review_interval: f64,
}

impl CongestionPolicy {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.lower >= self.upper {
            return Err(EngineError::InvalidPolicy("lower threshold must be below upper"));
        }
        if self.min_desks == 0 {
            return Err(EngineError::InvalidPolicy("policy needs at least one desk"));
        }
        if self.min_desks > self.max_desks {
            return Err(EngineError::InvalidPolicy("min_desks exceeds max_desks"));
        }
        if !(self.review_interval.is_finite() && self.review_interval > 0.0) {
            return Err(EngineError::InvalidPolicy("review interval must be positive"));
        }
        Ok(())
    }

    pub fn next_level(&self, queue_length: usize, current: u32) -> u32 {
        congestion_based_staffing(
            queue_length,
            current,
            self.upper,
            self.lower,
            self.min_desks,
            self.max_desks,
        )
    }
}

/// One step of the threshold rule, clamped to `[min_desks, max_desks]`.
pub fn congestion_based_staffing(
    queue_length: usize,
    current_desks: u32,
    upper: usize,
    lower: usize,
    min_desks: u32,
    max_desks: u32,
) -> u32 {
    let next = if queue_length >= upper {
        current_desks.saturating_add(1)
    } else if queue_length <= lower {
        current_desks.saturating_sub(1)
    } else {
        current_desks
    };
    next.clamp(min_desks, max_desks)
}
