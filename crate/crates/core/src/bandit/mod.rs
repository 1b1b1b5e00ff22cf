//! Arm distributions, the stochastic environment and the randomness
//! contract shared by every other module.

mod env;
mod rng;

pub use env::{expected_regret_of_policy, BernoulliBanditEnv, RewardEnv};
pub use rng::SeededRng;

use crate::error::{BanditError, Result};

/// Absolute tolerance on `Σ p(a) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability vector over `K ≥ 2` arms.
///
/// Used for played policies, posteriors and priors alike. The constructor
/// enforces non-negativity and normalization, so every value of this type
/// is a valid distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmDistribution {
    probs: Vec<f64>,
}

impl ArmDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate(&probs)?;
        Ok(ArmDistribution { probs })
    }

    pub fn uniform(num_arms: usize) -> Result<Self> {
        if num_arms < 2 {
            return Err(BanditError::InvalidDistribution(format!(
                "need at least 2 arms, got {num_arms}"
            )));
        }
        Ok(ArmDistribution {
            probs: vec![1.0 / num_arms as f64; num_arms],
        })
    }

    pub fn point_mass(num_arms: usize, arm: usize) -> Result<Self> {
        if arm >= num_arms {
            return Err(BanditError::InvalidArm { arm, num_arms });
        }
        let mut probs = vec![0.0; num_arms];
        probs[arm] = 1.0;
        ArmDistribution::new(probs)
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn num_arms(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn prob(&self, arm: usize) -> f64 {
        self.probs[arm]
    }

    pub fn min_mass(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Replaces the contents with `probs`, validating first. The arm count
    /// must not change. Does not allocate.
    pub fn overwrite(&mut self, probs: &[f64]) -> Result<()> {
        if probs.len() != self.probs.len() {
            return Err(BanditError::LengthMismatch {
                expected: self.probs.len(),
                got: probs.len(),
            });
        }
        validate(probs)?;
        self.probs.copy_from_slice(probs);
        Ok(())
    }

    pub fn copy_from(&mut self, other: &ArmDistribution) {
        if self.probs.len() == other.probs.len() {
            self.probs.copy_from_slice(&other.probs);
        } else {
            self.probs.clone_from(&other.probs);
        }
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

fn validate(probs: &[f64]) -> Result<()> {
    if probs.len() < 2 {
        return Err(BanditError::InvalidDistribution(format!(
            "need at least 2 arms, got {}",
            probs.len()
        )));
    }
    let mut sum = 0.0;
    for (a, &p) in probs.iter().enumerate() {
        if !(p >= 0.0) || !p.is_finite() {
            return Err(BanditError::InvalidDistribution(format!(
                "entry {a} is {p}"
            )));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(BanditError::InvalidDistribution(format!(
            "probabilities sum to {sum:.17}"
        )));
    }
    Ok(())
}

/// One round of play: the policy `π_t`, the arm drawn from it and the
/// observed reward.
#[derive(Debug, Clone, Copy)]
pub struct RoundRecord<'a> {
    pub round_index: u64,
    pub policy: &'a ArmDistribution,
    pub chosen_arm: usize,
    pub reward: f64,
}

impl<'a> RoundRecord<'a> {
    pub fn new(
        round_index: u64,
        policy: &'a ArmDistribution,
        chosen_arm: usize,
        reward: f64,
    ) -> Result<Self> {
        if round_index == 0 {
            return Err(BanditError::param("rounds are numbered from 1"));
        }
        if chosen_arm >= policy.num_arms() {
            return Err(BanditError::InvalidArm {
                arm: chosen_arm,
                num_arms: policy.num_arms(),
            });
        }
        if !(0.0..=1.0).contains(&reward) {
            return Err(BanditError::param(format!("reward {reward} outside [0, 1]")));
        }
        Ok(RoundRecord {
            round_index,
            policy,
            chosen_arm,
            reward,
        })
    }
}

/// Draws an arm from `policy` by inverting its CDF with one uniform.
#[inline]
pub fn sample_arm(policy: &ArmDistribution, rng: &mut SeededRng) -> usize {
    let u = rng.next_unit();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (a, &p) in policy.probs.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last_positive = a;
            if u < cum {
                return a;
            }
        }
    }
    // u landed in the rounding gap above the accumulated sum.
    last_positive
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = a;
        }
    }
    best
}
