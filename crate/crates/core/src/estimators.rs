//! Importance-weighted reward estimates and the cumulative variance of the
//! regret martingales `t(Δ̂_t(a) − Δ(a))`.
//!
//! Three variance trackers run side by side:
//!
//! * `analytic_variance`: the exact conditional variance summed over rounds,
//!   `Σ_τ E[R²|a]/π_τ(a) + E[R²|a*]/π_τ(a*) − Δ(a)²`. The simulator knows the
//!   environment, so this is computable without sampling noise.
//! * `relaxed_variance`: `Σ_τ 1/π_τ(a) + 1/π_τ(a*)`, the upper bound obtained
//!   from `R ≤ 1` and dropping `Δ(a)²`. It is accumulated for `a*` as well
//!   (`2/π_τ(a*)` per round), which keeps it below `2t/ε_t` on every arm.
//! * `empirical_sq_dev`: realized squared martingale differences, whose
//!   expectation equals the analytic value.
//!
//! For `a = a*` the analytic and empirical trackers are identically zero.

use crate::bandit::{ArmDistribution, RewardEnv, RoundRecord};
use crate::error::{BanditError, Result};

/// `R_t^a`: the reward divided by the probability of the chosen arm, zero on
/// every other arm.
#[inline]
pub fn importance_weighted_sample(
    reward: f64,
    arm: usize,
    chosen: usize,
    policy: &ArmDistribution,
) -> Result<f64> {
    check_arm(arm, policy.num_arms())?;
    let p = policy.prob(arm);
    if p <= 0.0 {
        return Err(BanditError::ZeroMass { arm });
    }
    Ok(if arm == chosen { reward / p } else { 0.0 })
}

/// Exact one-round conditional variance of `[R^{a*} − R^a] − Δ(a)` given the
/// policy.
///
/// Only one arm is pulled per round, so the cross term vanishes and the
/// second moment is `E[R²|a]/π(a) + E[R²|a*]/π(a*)`.
#[inline]
pub fn conditional_variance_increment<E: RewardEnv + ?Sized>(
    policy: &ArmDistribution,
    env: &E,
    arm: usize,
) -> Result<f64> {
    let best = env.best_arm();
    check_arm(arm, policy.num_arms())?;
    if arm == best {
        return Ok(0.0);
    }
    let (pa, pb) = positive_masses(policy, arm, best)?;
    let gap = env.gap(arm);
    Ok(env.second_moment(arm) / pa + env.second_moment(best) / pb - gap * gap)
}

/// `1/π(a) + 1/π(a*)`: the increment used by the `2t/ε_t` variance bound.
/// For `a = a*` this is `2/π(a*)`.
#[inline]
pub fn relaxed_variance_increment<E: RewardEnv + ?Sized>(
    policy: &ArmDistribution,
    env: &E,
    arm: usize,
) -> Result<f64> {
    let best = env.best_arm();
    check_arm(arm, policy.num_arms())?;
    let (pa, pb) = positive_masses(policy, arm, best)?;
    Ok(1.0 / pa + 1.0 / pb)
}

/// `Σ_a ρ(a) · value(a)`.
pub fn weighted_average(values: &[f64], rho: &ArmDistribution) -> Result<f64> {
    if values.len() != rho.num_arms() {
        return Err(BanditError::LengthMismatch {
            expected: rho.num_arms(),
            got: values.len(),
        });
    }
    Ok(values.iter().zip(rho.probs()).map(|(v, p)| v * p).sum())
}

fn check_arm(arm: usize, num_arms: usize) -> Result<()> {
    if arm >= num_arms {
        Err(BanditError::InvalidArm { arm, num_arms })
    } else {
        Ok(())
    }
}

fn positive_masses(policy: &ArmDistribution, arm: usize, best: usize) -> Result<(f64, f64)> {
    let pa = policy.prob(arm);
    if pa <= 0.0 {
        return Err(BanditError::ZeroMass { arm });
    }
    let pb = policy.prob(best);
    if pb <= 0.0 {
        return Err(BanditError::ZeroMass { arm: best });
    }
    Ok((pa, pb))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    t: u64,
    weighted_sums: Vec<f64>,
    analytic_variance: Vec<f64>,
    relaxed_variance: Vec<f64>,
    empirical_sq_dev: Vec<f64>,
    min_mass_seen: f64,
    track_variance: bool,
}

impl EstimatorState {
    pub fn new(num_arms: usize) -> Self {
        EstimatorState {
            t: 0,
            weighted_sums: vec![0.0; num_arms],
            analytic_variance: vec![0.0; num_arms],
            relaxed_variance: vec![0.0; num_arms],
            empirical_sq_dev: vec![0.0; num_arms],
            min_mass_seen: f64::INFINITY,
            track_variance: true,
        }
    }

    /// State that keeps only the reward sums. Needed for policies that put
    /// zero mass on some arms, where the variance is unbounded.
    pub fn without_variance(num_arms: usize) -> Self {
        EstimatorState {
            track_variance: false,
            ..EstimatorState::new(num_arms)
        }
    }

    /// State after `t` rounds with the given importance-weighted sums and no
    /// variance history.
    pub fn from_sums(t: u64, weighted_sums: Vec<f64>) -> Self {
        let k = weighted_sums.len();
        EstimatorState {
            t,
            weighted_sums,
            ..EstimatorState::without_variance(k)
        }
    }

    pub fn num_arms(&self) -> usize {
        self.weighted_sums.len()
    }

    pub fn rounds(&self) -> u64 {
        self.t
    }

    pub fn tracks_variance(&self) -> bool {
        self.track_variance
    }

    pub fn weighted_sums(&self) -> &[f64] {
        &self.weighted_sums
    }

    pub fn analytic_variance(&self) -> &[f64] {
        &self.analytic_variance
    }

    pub fn relaxed_variance(&self) -> &[f64] {
        &self.relaxed_variance
    }

    pub fn empirical_sq_dev(&self) -> &[f64] {
        &self.empirical_sq_dev
    }

    /// Smallest probability any played policy assigned to any arm.
    pub fn min_mass_seen(&self) -> f64 {
        self.min_mass_seen
    }

    pub fn update<E: RewardEnv + ?Sized>(
        &mut self,
        record: &RoundRecord<'_>,
        env: &E,
    ) -> Result<()> {
        if record.round_index != self.t + 1 {
            return Err(BanditError::OutOfOrder {
                expected: self.t + 1,
                got: record.round_index,
            });
        }
        let policy = record.policy;
        if policy.num_arms() != self.num_arms() {
            return Err(BanditError::LengthMismatch {
                expected: self.num_arms(),
                got: policy.num_arms(),
            });
        }
        let chosen = record.chosen_arm;
        let weighted = importance_weighted_sample(record.reward, chosen, chosen, policy)?;

        if self.track_variance {
            let best = env.best_arm();
            let best_sample = if chosen == best { weighted } else { 0.0 };
            // Validate before touching state so a failure leaves it unchanged.
            for a in 0..self.num_arms() {
                positive_masses(policy, a, best)?;
            }
            for a in 0..self.num_arms() {
                self.relaxed_variance[a] += relaxed_variance_increment(policy, env, a)?;
                if a == best {
                    continue;
                }
                self.analytic_variance[a] += conditional_variance_increment(policy, env, a)?;
                let arm_sample = if chosen == a { weighted } else { 0.0 };
                let dev = (best_sample - arm_sample) - env.gap(a);
                self.empirical_sq_dev[a] += dev * dev;
            }
        }

        self.weighted_sums[chosen] += weighted;
        self.min_mass_seen = self.min_mass_seen.min(policy.min_mass());
        self.t += 1;
        Ok(())
    }

    /// `R̂_t(a) = (1/t) Σ_τ R_τ^a`.
    pub fn hat_reward(&self, arm: usize) -> Result<f64> {
        check_arm(arm, self.num_arms())?;
        if self.t == 0 {
            return Err(BanditError::EmptyHistory);
        }
        Ok(self.weighted_sums[arm] / self.t as f64)
    }

    /// All `R̂_t(a)` written into `out`.
    pub fn hat_rewards_into(&self, out: &mut [f64]) -> Result<()> {
        if out.len() != self.num_arms() {
            return Err(BanditError::LengthMismatch {
                expected: self.num_arms(),
                got: out.len(),
            });
        }
        if self.t == 0 {
            return Err(BanditError::EmptyHistory);
        }
        let inv = 1.0 / self.t as f64;
        for (o, s) in out.iter_mut().zip(&self.weighted_sums) {
            *o = s * inv;
        }
        Ok(())
    }

    pub fn hat_rewards(&self) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.num_arms()];
        self.hat_rewards_into(&mut out)?;
        Ok(out)
    }

    /// `Δ̂_t(a) = R̂_t(a*) − R̂_t(a)`. Exactly zero for `a = a*`; may be
    /// negative otherwise.
    pub fn empirical_regret<E: RewardEnv + ?Sized>(&self, arm: usize, env: &E) -> Result<f64> {
        check_arm(arm, self.num_arms())?;
        if self.t == 0 {
            return Err(BanditError::EmptyHistory);
        }
        let best = env.best_arm();
        if arm == best {
            return Ok(0.0);
        }
        Ok(self.hat_reward(best)? - self.hat_reward(arm)?)
    }

    pub fn empirical_regrets<E: RewardEnv + ?Sized>(&self, env: &E) -> Result<Vec<f64>> {
        (0..self.num_arms())
            .map(|a| self.empirical_regret(a, env))
            .collect()
    }

    /// `V_t(ρ) = Σ_a ρ(a) V_t(a)` from the analytic tracker.
    pub fn variance_of(&self, rho: &ArmDistribution) -> Result<f64> {
        if !self.track_variance {
            return Err(BanditError::param("variance tracking is disabled"));
        }
        weighted_average(&self.analytic_variance, rho)
    }

    /// `Σ_a ρ(a) Σ_τ (1/π_τ(a) + 1/π_τ(a*))`, the relaxed counterpart of
    /// [`variance_of`](Self::variance_of).
    pub fn relaxed_variance_of(&self, rho: &ArmDistribution) -> Result<f64> {
        if !self.track_variance {
            return Err(BanditError::param("variance tracking is disabled"));
        }
        weighted_average(&self.relaxed_variance, rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{sample_arm, BernoulliBanditEnv, SeededRng};

    fn env() -> BernoulliBanditEnv {
        BernoulliBanditEnv::new(vec![0.5, 0.6]).unwrap()
    }

    #[test]
    fn importance_weights() {
        let p = ArmDistribution::new(vec![0.35, 0.65]).unwrap();
        assert_eq!(importance_weighted_sample(0.7, 1, 0, &p).unwrap(), 0.0);
        assert!((importance_weighted_sample(0.7, 0, 0, &p).unwrap() - 2.0).abs() < 1e-15);
        let p = ArmDistribution::new(vec![0.05, 0.95]).unwrap();
        assert!((importance_weighted_sample(1.0, 0, 0, &p).unwrap() - 20.0).abs() < 1e-12);
        let p = ArmDistribution::point_mass(2, 1).unwrap();
        assert!(matches!(
            importance_weighted_sample(1.0, 0, 1, &p),
            Err(BanditError::ZeroMass { arm: 0 })
        ));
    }

    #[test]
    fn single_round_update() {
        let e = env();
        let p = ArmDistribution::uniform(2).unwrap();
        let mut s = EstimatorState::new(2);
        assert!(s.weighted_sums().iter().all(|&x| x == 0.0));
        s.update(&RoundRecord::new(1, &p, 0, 1.0).unwrap(), &e).unwrap();
        assert_eq!(s.hat_reward(0).unwrap(), 2.0);
        assert_eq!(s.hat_reward(1).unwrap(), 0.0);
        assert_eq!(s.rounds(), 1);
    }

    #[test]
    fn out_of_order_round_rejected() {
        let e = env();
        let p = ArmDistribution::uniform(2).unwrap();
        let mut s = EstimatorState::new(2);
        let err = s.update(&RoundRecord::new(2, &p, 0, 1.0).unwrap(), &e);
        assert!(matches!(err, Err(BanditError::OutOfOrder { expected: 1, got: 2 })));
        assert_eq!(s, EstimatorState::new(2));
    }

    #[test]
    fn zero_mass_policy_needs_sums_only_state() {
        let e = env();
        let p = ArmDistribution::point_mass(2, 1).unwrap();
        let mut s = EstimatorState::new(2);
        assert!(s.update(&RoundRecord::new(1, &p, 1, 1.0).unwrap(), &e).is_err());
        assert_eq!(s.rounds(), 0);
        let mut s = EstimatorState::without_variance(2);
        s.update(&RoundRecord::new(1, &p, 1, 1.0).unwrap(), &e).unwrap();
        assert_eq!(s.hat_reward(1).unwrap(), 1.0);
    }

    #[test]
    fn empirical_regret_cases() {
        let e = env();
        let s = EstimatorState::from_sums(1, vec![2.0, 0.0]);
        assert_eq!(s.empirical_regret(1, &e).unwrap(), 0.0);
        assert_eq!(s.empirical_regret(0, &e).unwrap(), -2.0);
        assert!(matches!(
            EstimatorState::new(2).empirical_regret(0, &e),
            Err(BanditError::EmptyHistory)
        ));
    }

    #[test]
    fn empirical_regret_converges_under_uniform_play() {
        let e = env();
        let p = ArmDistribution::uniform(2).unwrap();
        let mut s = EstimatorState::new(2);
        let mut rng = SeededRng::new(17, 0);
        let n = 100_000u64;
        for t in 1..=n {
            let a = sample_arm(&p, &mut rng);
            let r = e.draw_reward(a, &mut rng).unwrap();
            s.update(&RoundRecord::new(t, &p, a, r).unwrap(), &e).unwrap();
        }
        let v = s.empirical_regret(0, &e).unwrap();
        // Per-round variance of the difference is 2.19.
        let sigma = (2.19 / n as f64).sqrt();
        assert!((v - 0.1).abs() <= 4.0 * sigma, "Δ̂ = {v}");
        assert!(s.analytic_variance().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn variance_increment_hand_value() {
        let e = env();
        let p = ArmDistribution::uniform(2).unwrap();
        assert_eq!(conditional_variance_increment(&p, &e, 1).unwrap(), 0.0);
        let v = conditional_variance_increment(&p, &e, 0).unwrap();
        assert!((v - 2.19).abs() < 1e-12, "{v}");
        assert_eq!(relaxed_variance_increment(&p, &e, 0).unwrap(), 4.0);
        assert_eq!(relaxed_variance_increment(&p, &e, 1).unwrap(), 4.0);
        let skew = ArmDistribution::new(vec![0.2, 0.8]).unwrap();
        assert!((relaxed_variance_increment(&skew, &e, 1).unwrap() - 2.5).abs() < 1e-12);
        let bad = ArmDistribution::point_mass(2, 1).unwrap();
        assert!(conditional_variance_increment(&bad, &e, 0).is_err());
    }

    #[test]
    fn variance_increment_monte_carlo() {
        let e = env();
        let p = ArmDistribution::uniform(2).unwrap();
        let mut rng = SeededRng::new(23, 0);
        let n = 1_000_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let a = sample_arm(&p, &mut rng);
            let r = e.draw_reward(a, &mut rng).unwrap();
            let w = r / p.prob(a);
            let diff = if a == 1 { w } else { -w };
            let x = (diff - 0.1).powi(2);
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let sd = (sum_sq / n as f64 - mean * mean).sqrt();
        assert!((mean - 2.19).abs() <= 4.0 * sd / (n as f64).sqrt(), "mean = {mean}");
    }

    #[test]
    fn weighted_average_cases() {
        let point = ArmDistribution::point_mass(2, 0).unwrap();
        assert_eq!(weighted_average(&[2.19, 0.0], &point).unwrap(), 2.19);
        let u = ArmDistribution::uniform(2).unwrap();
        assert!((weighted_average(&[2.19, 0.0], &u).unwrap() - 1.095).abs() < 1e-15);
        let r = ArmDistribution::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(weighted_average(&[4.0, 0.0], &r).unwrap(), 1.0);
        assert!(weighted_average(&[1.0, 2.0, 3.0], &r).is_err());
    }

    #[test]
    fn one_round_mean_is_unbiased() {
        let e = env();
        let p = ArmDistribution::uniform(2).unwrap();
        let trials = 10_000;
        for arm in 0..2 {
            let mut rng = SeededRng::new(5, arm as u64);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..trials {
                let mut s = EstimatorState::new(2);
                let a = sample_arm(&p, &mut rng);
                let r = e.draw_reward(a, &mut rng).unwrap();
                s.update(&RoundRecord::new(1, &p, a, r).unwrap(), &e).unwrap();
                let x = s.hat_reward(arm).unwrap();
                sum += x;
                sum_sq += x * x;
            }
            let n = trials as f64;
            let mean = sum / n;
            let sd = ((sum_sq - n * mean * mean) / (n - 1.0)).sqrt();
            assert!((mean - e.mean(arm)).abs() <= 4.0 * sd / n.sqrt(), "arm {arm}: {mean}");
        }
    }

    #[test]
    fn empirical_tracker_matches_analytic_in_expectation() {
        // Fixed non-uniform policy sequence; average the realized squared
        // deviations over replications and compare with the oracle.
        let e = BernoulliBanditEnv::new(vec![0.3, 0.5, 0.8]).unwrap();
        let policies: Vec<ArmDistribution> = (0..20)
            .map(|i| {
                let x = 0.1 + 0.02 * i as f64;
                ArmDistribution::new(vec![x, 0.3, 0.7 - x]).unwrap()
            })
            .collect();
        let reps = 4000;
        let mut analytic = vec![0.0; 3];
        let mut acc = vec![(0.0, 0.0); 3];
        for rep in 0..reps {
            let mut rng = SeededRng::new(31, rep);
            let mut s = EstimatorState::new(3);
            for (i, p) in policies.iter().enumerate() {
                let a = sample_arm(p, &mut rng);
                let r = e.draw_reward(a, &mut rng).unwrap();
                s.update(&RoundRecord::new(i as u64 + 1, p, a, r).unwrap(), &e).unwrap();
            }
            analytic.copy_from_slice(s.analytic_variance());
            for a in 0..3 {
                let x = s.empirical_sq_dev()[a];
                acc[a].0 += x;
                acc[a].1 += x * x;
            }
        }
        let n = reps as f64;
        for a in 0..3 {
            let mean = acc[a].0 / n;
            let sd = ((acc[a].1 - n * mean * mean) / (n - 1.0)).sqrt();
            assert!(
                (mean - analytic[a]).abs() <= 4.0 * sd / n.sqrt() + 1e-12,
                "arm {a}: empirical {mean} vs analytic {}",
                analytic[a]
            );
        }
        assert_eq!(analytic[2], 0.0);
    }
}
