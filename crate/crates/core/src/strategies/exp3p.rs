//! EXP3.P.1: EXP3.P restarted on doubling epochs.
//!
//! Variant implemented (Auer, Cesa-Bianchi, Freund and Schapire, 2002):
//!
//! * epoch `r` lasts `T_r = 2^r` rounds and uses `δ_r = δ / ((r+1)(r+2))`;
//! * the first epoch is `r* = min{r : δ_r ≥ K e^{−K T_r}}`;
//! * within an epoch EXP3.P runs with `α = 2√(ln(K T_r / δ_r))` and
//!   `γ = min{3/5, 2√(3 K ln K / (5 T_r))}`, starting from equal weights;
//! * `p_i = (1 − γ) w_i / Σ w + γ / K`;
//! * `w_j ← w_j exp(γ/(3K) · (x̂_j + α / (p_j √(K T_r))))` with `x̂_j = x_j / p_j`
//!   for the pulled arm and `0` otherwise.
//!
//! Weights are kept in the log domain.

use crate::bandit::{ArmDistribution, RoundRecord};
use crate::error::{BanditError, Result};
use crate::estimators::EstimatorState;

use super::Strategy;

/// Parameters of one EXP3.P epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp3PEpoch {
    pub index: u32,
    pub first_round: u64,
    pub length: u64,
    pub delta: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Exp3PEpoch {
    fn new(index: u32, first_round: u64, num_arms: usize, delta: f64) -> Self {
        let k = num_arms as f64;
        let length = 1u64 << index;
        let r = index as f64;
        let delta_r = delta / ((r + 1.0) * (r + 2.0));
        let horizon = length as f64;
        let alpha = 2.0 * (k * horizon / delta_r).ln().sqrt();
        let gamma = (2.0 * (3.0 * k * k.ln() / (5.0 * horizon)).sqrt()).min(0.6);
        Exp3PEpoch {
            index,
            first_round,
            length,
            delta: delta_r,
            alpha,
            gamma,
        }
    }

    pub fn last_round(&self) -> u64 {
        self.first_round + self.length - 1
    }

    pub fn floor(&self, num_arms: usize) -> f64 {
        self.gamma / num_arms as f64
    }

    fn next(&self, num_arms: usize, delta: f64) -> Self {
        Exp3PEpoch::new(self.index + 1, self.last_round() + 1, num_arms, delta)
    }
}

/// `r* = min{r : δ_r ≥ K e^{−K 2^r}}`.
pub fn first_epoch_index(num_arms: usize, delta: f64) -> u32 {
    let k = num_arms as f64;
    (0u32..63)
        .find(|&r| {
            let rf = r as f64;
            let delta_r = delta / ((rf + 1.0) * (rf + 2.0));
            delta_r >= k * (-k * (1u64 << r) as f64).exp()
        })
        .unwrap_or(62)
}

/// The epoch containing `round`.
pub fn epoch_of(round: u64, num_arms: usize, delta: f64) -> Exp3PEpoch {
    let mut epoch = Exp3PEpoch::new(first_epoch_index(num_arms, delta), 1, num_arms, delta);
    while epoch.last_round() < round {
        epoch = epoch.next(num_arms, delta);
    }
    epoch
}

#[derive(Debug, Clone)]
pub struct Exp3P1Strategy {
    label: String,
    num_arms: usize,
    delta: f64,
    epoch: Exp3PEpoch,
    log_weights: Vec<f64>,
    scratch: Vec<f64>,
    unsmoothed: ArmDistribution,
    policy: ArmDistribution,
    next_round: u64,
}

impl Exp3P1Strategy {
    pub fn new(label: impl Into<String>, num_arms: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(BanditError::param(format!("delta {delta} outside (0, 1)")));
        }
        let uniform = ArmDistribution::uniform(num_arms)?;
        let epoch = Exp3PEpoch::new(first_epoch_index(num_arms, delta), 1, num_arms, delta);
        Ok(Exp3P1Strategy {
            label: label.into(),
            num_arms,
            delta,
            epoch,
            log_weights: vec![0.0; num_arms],
            scratch: vec![0.0; num_arms],
            unsmoothed: uniform.clone(),
            policy: uniform,
            next_round: 1,
        })
    }

    pub fn epoch(&self) -> &Exp3PEpoch {
        &self.epoch
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Strategy for Exp3P1Strategy {
    fn label(&self) -> &str {
        &self.label
    }

    fn num_arms(&self) -> usize {
        self.num_arms
    }

    fn policy(&mut self, round: u64, _estimates: &EstimatorState) -> Result<&ArmDistribution> {
        if round != self.next_round {
            return Err(BanditError::OutOfOrder {
                expected: self.next_round,
                got: round,
            });
        }
        if round > self.epoch.last_round() {
            self.epoch = self.epoch.next(self.num_arms, self.delta);
            // Equal initial weights: only their ratios matter.
            self.log_weights.iter_mut().for_each(|w| *w = 0.0);
        }
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (s, &w) in self.scratch.iter_mut().zip(&self.log_weights) {
            *s = (w - max).exp();
            z += *s;
        }
        self.scratch.iter_mut().for_each(|s| *s /= z);
        self.unsmoothed.overwrite(&self.scratch)?;
        let gamma = self.epoch.gamma;
        let floor = gamma / self.num_arms as f64;
        self.scratch
            .iter_mut()
            .for_each(|s| *s = (1.0 - gamma) * *s + floor);
        self.policy.overwrite(&self.scratch)?;
        Ok(&self.policy)
    }

    fn observe(&mut self, record: &RoundRecord<'_>) -> Result<()> {
        if record.round_index != self.next_round {
            return Err(BanditError::OutOfOrder {
                expected: self.next_round,
                got: record.round_index,
            });
        }
        let k = self.num_arms as f64;
        let Exp3PEpoch {
            alpha,
            gamma,
            length,
            ..
        } = self.epoch;
        let rate = gamma / (3.0 * k);
        let bonus = alpha / (k * length as f64).sqrt();
        for (j, w) in self.log_weights.iter_mut().enumerate() {
            let p = record.policy.prob(j);
            let x_hat = if j == record.chosen_arm {
                record.reward / p
            } else {
                0.0
            };
            *w += rate * (x_hat + bonus / p);
        }
        self.next_round += 1;
        Ok(())
    }

    fn exploration_floor(&self, round: u64) -> Option<f64> {
        Some(epoch_of(round, self.num_arms, self.delta).floor(self.num_arms))
    }

    fn unsmoothed(&self) -> Option<&ArmDistribution> {
        Some(&self.unsmoothed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{sample_arm, BernoulliBanditEnv, RewardEnv, SeededRng};

    #[test]
    fn first_epoch_for_two_arms() {
        // δ_r vs 2e^{−2·2^r}: r = 3 is the first with 0.001/20 ≥ 2e^{−16}.
        assert_eq!(first_epoch_index(2, 0.001), 3);
        let e = epoch_of(1, 2, 0.001);
        assert_eq!((e.index, e.first_round, e.length), (3, 1, 8));
        let e = epoch_of(9, 2, 0.001);
        assert_eq!((e.index, e.first_round, e.length), (4, 9, 16));
        assert!((e.delta - 0.001 / 30.0).abs() < 1e-18);
        assert!((e.alpha - 2.0 * (32.0 / e.delta).ln().sqrt()).abs() < 1e-12);
        assert_eq!(e.gamma, 0.6f64.min(2.0 * (6.0 * 2f64.ln() / 80.0).sqrt()));
    }

    #[test]
    fn floor_never_increases() {
        let mut prev = f64::INFINITY;
        for round in (1..200_000).step_by(97) {
            let f = epoch_of(round, 3, 0.001).floor(3);
            assert!(f <= prev);
            prev = f;
        }
    }

    #[test]
    fn first_round_uniform_and_floor_respected() {
        let env = BernoulliBanditEnv::new(vec![0.5, 0.6]).unwrap();
        let mut s = Exp3P1Strategy::new("EXP3.P.1", 2, 0.001).unwrap();
        let est = EstimatorState::without_variance(2);
        let mut rng = SeededRng::new(4, 0);
        let mut current = ArmDistribution::uniform(2).unwrap();
        for round in 1..=20_000u64 {
            current.copy_from(s.policy(round, &est).unwrap());
            if round == 1 {
                assert_eq!(current.probs(), &[0.5, 0.5]);
            }
            let floor = s.exploration_floor(round).unwrap();
            assert_eq!(floor, s.epoch().floor(2));
            assert!(current.min_mass() >= floor * (1.0 - 1e-12));
            let arm = sample_arm(&current, &mut rng);
            let r = env.draw_reward(arm, &mut rng).unwrap();
            s.observe(&RoundRecord::new(round, &current, arm, r).unwrap()).unwrap();
        }
    }

    #[test]
    fn weights_restart_each_epoch() {
        let mut s = Exp3P1Strategy::new("p", 2, 0.001).unwrap();
        let est = EstimatorState::without_variance(2);
        let mut current = ArmDistribution::uniform(2).unwrap();
        for round in 1..=8u64 {
            current.copy_from(s.policy(round, &est).unwrap());
            s.observe(&RoundRecord::new(round, &current, 1, 1.0).unwrap()).unwrap();
        }
        assert!(current.prob(1) > 0.5);
        let p = s.policy(9, &est).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(Exp3P1Strategy::new("p", 2, 0.0).is_err());
        assert!(Exp3P1Strategy::new("p", 2, 1.0).is_err());
    }
}
