use crate::bandit::{ArmDistribution, RoundRecord};
use crate::error::{BanditError, Result};
use crate::estimators::EstimatorState;

use super::Strategy;

/// UCB1 arm choice after `plays` total pulls.
///
/// Arms that were never pulled come first, lowest index first. After that
/// the choice maximizes `mean[a] + √(2 ln(plays) / counts[a])`, lowest index
/// on ties.
pub fn ucb1_policy(counts: &[u64], means: &[f64], plays: u64) -> usize {
    if let Some(a) = counts.iter().position(|&c| c == 0) {
        return a;
    }
    let log_t = (plays.max(1) as f64).ln();
    let mut best = 0;
    let mut best_index = f64::NEG_INFINITY;
    for (a, (&c, &m)) in counts.iter().zip(means).enumerate() {
        let index = m + (2.0 * log_t / c as f64).sqrt();
        if index > best_index {
            best_index = index;
            best = a;
        }
    }
    best
}

/// Deterministic UCB1. Each policy is a point mass on the chosen arm.
#[derive(Debug, Clone)]
pub struct Ucb1Strategy {
    label: String,
    counts: Vec<u64>,
    sums: Vec<f64>,
    means: Vec<f64>,
    plays: u64,
    policy: ArmDistribution,
    scratch: Vec<f64>,
}

impl Ucb1Strategy {
    pub fn new(label: impl Into<String>, num_arms: usize) -> Result<Self> {
        Ok(Ucb1Strategy {
            label: label.into(),
            counts: vec![0; num_arms],
            sums: vec![0.0; num_arms],
            means: vec![0.0; num_arms],
            plays: 0,
            policy: ArmDistribution::uniform(num_arms)?,
            scratch: vec![0.0; num_arms],
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

impl Strategy for Ucb1Strategy {
    fn label(&self) -> &str {
        &self.label
    }

    fn num_arms(&self) -> usize {
        self.counts.len()
    }

    fn policy(&mut self, round: u64, _estimates: &EstimatorState) -> Result<&ArmDistribution> {
        if round != self.plays + 1 {
            return Err(BanditError::OutOfOrder {
                expected: self.plays + 1,
                got: round,
            });
        }
        let arm = ucb1_policy(&self.counts, &self.means, self.plays);
        self.scratch.iter_mut().for_each(|p| *p = 0.0);
        self.scratch[arm] = 1.0;
        self.policy.overwrite(&self.scratch)?;
        Ok(&self.policy)
    }

    fn observe(&mut self, record: &RoundRecord<'_>) -> Result<()> {
        let a = record.chosen_arm;
        if a >= self.counts.len() {
            return Err(BanditError::InvalidArm {
                arm: a,
                num_arms: self.counts.len(),
            });
        }
        self.counts[a] += 1;
        self.sums[a] += record.reward;
        self.means[a] = self.sums[a] / self.counts[a] as f64;
        self.plays += 1;
        Ok(())
    }

    fn exploration_floor(&self, _round: u64) -> Option<f64> {
        None
    }
}
