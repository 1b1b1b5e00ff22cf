use crate::error::{BanditError, Result};

/// Every round up to `dense_until`, then geometric steps of `ratio`. The
/// horizon itself is always included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointSchedule {
    pub dense_until: u64,
    pub ratio: f64,
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        CheckpointSchedule {
            dense_until: 1000,
            ratio: 1.05,
        }
    }
}

impl CheckpointSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 1.0) || !self.ratio.is_finite() {
            return Err(BanditError::param(format!(
                "checkpoint ratio {} must exceed 1",
                self.ratio
            )));
        }
        Ok(())
    }

    pub fn points(&self, horizon: u64) -> Vec<u64> {
        let mut points: Vec<u64> = (1..=self.dense_until.min(horizon)).collect();
        let mut t = points.last().copied().unwrap_or(0).max(1);
        if points.is_empty() {
            points.push(1);
        }
        while t < horizon {
            let next = ((t as f64 * self.ratio).ceil() as u64).max(t + 1).min(horizon);
            points.push(next);
            t = next;
        }
        points
    }
}
