//! The per-replication simulation loop.

use crate::bandit::{
    sample_arm, ArmDistribution, BernoulliBanditEnv, RewardEnv, RoundRecord, SeededRng,
};
use crate::bounds::lemma2_variance_bound;
use crate::error::{BanditError, Result};
use crate::estimators::{weighted_average, EstimatorState};
use crate::strategies::{
    Exp3P1Strategy, Exp3Strategy, Strategy, StrategySpec, Ucb1Strategy,
};

use super::schedule::CheckpointSchedule;

/// Static dispatch over the shipped strategies.
#[derive(Debug, Clone)]
pub enum AnyStrategy {
    Exp3(Exp3Strategy),
    Exp3P1(Exp3P1Strategy),
    Ucb1(Ucb1Strategy),
}

impl AnyStrategy {
    pub fn build(spec: &StrategySpec, num_arms: usize) -> Result<Self> {
        Ok(match spec {
            StrategySpec::Exp3 { label, params } => {
                AnyStrategy::Exp3(Exp3Strategy::new(label.clone(), num_arms, *params)?)
            }
            StrategySpec::Exp3P1 { label, delta } => {
                AnyStrategy::Exp3P1(Exp3P1Strategy::new(label.clone(), num_arms, *delta)?)
            }
            StrategySpec::Ucb1 { label } => {
                AnyStrategy::Ucb1(Ucb1Strategy::new(label.clone(), num_arms)?)
            }
        })
    }
}

macro_rules! dispatch {
    ($self:ident, $s:ident => $e:expr) => {
        match $self {
            AnyStrategy::Exp3($s) => $e,
            AnyStrategy::Exp3P1($s) => $e,
            AnyStrategy::Ucb1($s) => $e,
        }
    };
}

impl Strategy for AnyStrategy {
    fn label(&self) -> &str {
        dispatch!(self, s => s.label())
    }

    fn num_arms(&self) -> usize {
        dispatch!(self, s => s.num_arms())
    }

    #[inline]
    fn policy(&mut self, round: u64, estimates: &EstimatorState) -> Result<&ArmDistribution> {
        dispatch!(self, s => s.policy(round, estimates))
    }

    #[inline]
    fn observe(&mut self, record: &RoundRecord<'_>) -> Result<()> {
        dispatch!(self, s => s.observe(record))
    }

    fn exploration_floor(&self, round: u64) -> Option<f64> {
        dispatch!(self, s => s.exploration_floor(round))
    }

    fn unsmoothed(&self) -> Option<&ArmDistribution> {
        dispatch!(self, s => s.unsmoothed())
    }

    fn inverse_temperature(&self, t: u64) -> Option<f64> {
        dispatch!(self, s => s.inverse_temperature(t))
    }
}

/// State visible to a checkpoint observer after round `t`.
pub struct CheckpointView<'a, E: ?Sized> {
    pub t: u64,
    pub env: &'a E,
    pub estimator: &'a EstimatorState,
    /// `π_{t+1}`, built from the first `t` rounds.
    pub next_policy: &'a ArmDistribution,
    /// The distribution behind `π_{t+1}` before smoothing.
    pub unsmoothed: Option<&'a ArmDistribution>,
    /// `ε_t`, the floor of every policy played so far.
    pub floor: Option<f64>,
    pub gamma: Option<f64>,
    pub pseudo_regret: f64,
    pub expected_regret: f64,
    pub subopt_pulls: u64,
}

/// Plays `horizon` rounds and calls `on_checkpoint` after every round in
/// `checkpoints` (sorted, increasing).
pub fn simulate<E, S, F>(
    env: &E,
    strategy: &mut S,
    horizon: u64,
    checkpoints: &[u64],
    rng: &mut SeededRng,
    track_variance: bool,
    mut on_checkpoint: F,
) -> Result<()>
where
    E: RewardEnv + ?Sized,
    S: Strategy + ?Sized,
    F: FnMut(&CheckpointView<'_, E>) -> Result<()>,
{
    let k = env.num_arms();
    if strategy.num_arms() != k {
        return Err(BanditError::LengthMismatch {
            expected: k,
            got: strategy.num_arms(),
        });
    }
    let mut estimator = if track_variance {
        EstimatorState::new(k)
    } else {
        EstimatorState::without_variance(k)
    };
    let gaps: Vec<f64> = (0..k).map(|a| env.gap(a)).collect();
    let best = env.best_arm();
    let mut current = ArmDistribution::uniform(k)?;
    current.copy_from(strategy.policy(1, &estimator)?);

    let (mut pseudo, mut expected, mut subopt) = (0.0, 0.0, 0u64);
    let mut next_cp = checkpoints.iter().copied().peekable();
    for round in 1..=horizon {
        let arm = sample_arm(&current, rng);
        let reward = env.draw_reward(arm, rng)?;
        let record = RoundRecord::new(round, &current, arm, reward)?;
        estimator.update(&record, env)?;
        strategy.observe(&record)?;

        pseudo += gaps[arm];
        expected += current
            .probs()
            .iter()
            .zip(&gaps)
            .map(|(p, g)| p * g)
            .sum::<f64>();
        if arm != best {
            subopt += 1;
        }

        let next = strategy.policy(round + 1, &estimator)?;
        current.copy_from(next);

        if next_cp.peek() == Some(&round) {
            next_cp.next();
            on_checkpoint(&CheckpointView {
                t: round,
                env,
                estimator: &estimator,
                next_policy: &current,
                unsmoothed: strategy.unsmoothed(),
                floor: strategy.exploration_floor(round),
                gamma: strategy.inverse_temperature(round),
                pseudo_regret: pseudo,
                expected_regret: expected,
                subopt_pulls: subopt,
            })?;
        }
    }
    Ok(())
}

/// Measurements after round `t` of one replication. Quantities that do not
/// apply to a strategy (variances for UCB1, softmax checks for non-EXP3)
/// are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointRow {
    pub t: u64,
    pub pseudo_regret: f64,
    pub expected_regret: f64,
    /// `V_t(ρ̃_t)` for the smoothed, played distribution.
    pub variance_played: f64,
    /// `V_t(ρ_t)` for the distribution before smoothing.
    pub variance_unsmoothed: f64,
    /// `V_t(ρ̃_t)` from the relaxed `1/π(a) + 1/π(a*)` tracker.
    pub variance_played_relaxed: f64,
    pub subopt_pulls: u64,
    pub floor: f64,
    pub min_mass_seen: f64,
    /// `max_a |Δ(a) − Δ̂_t(a)|`, the worst case over all `ρ`.
    pub max_deviation: f64,
    /// `Δ̂_t(ρ_t^exp)`.
    pub softmax_empirical_regret: f64,
    /// `ln K / γ_t`.
    pub softmax_regret_bound: f64,
    /// Number of arms with `V_t(a) > 2t/ε_t`.
    pub lemma2_violations: u32,
}

/// Checkpoint rows of one replication, with per-arm series stored flat
/// (`checkpoint * K + arm`).
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: String,
    pub seed: u64,
    pub stream_id: u64,
    pub num_arms: usize,
    pub rows: Vec<CheckpointRow>,
    pub arm_variance: Vec<f64>,
    pub arm_relaxed_variance: Vec<f64>,
    pub arm_policy: Vec<f64>,
}

impl RunTrace {
    pub fn checkpoints(&self) -> impl Iterator<Item = u64> + '_ {
        self.rows.iter().map(|r| r.t)
    }

    pub fn arm_variance_at(&self, index: usize) -> &[f64] {
        &self.arm_variance[index * self.num_arms..(index + 1) * self.num_arms]
    }

    pub fn arm_relaxed_variance_at(&self, index: usize) -> &[f64] {
        &self.arm_relaxed_variance[index * self.num_arms..(index + 1) * self.num_arms]
    }

    pub fn arm_policy_at(&self, index: usize) -> &[f64] {
        &self.arm_policy[index * self.num_arms..(index + 1) * self.num_arms]
    }
}

/// One replication of `spec` on `env`, deterministic in `(seed, stream_id)`.
pub fn run_replication(
    env: &BernoulliBanditEnv,
    spec: &StrategySpec,
    horizon: u64,
    schedule: &CheckpointSchedule,
    seed: u64,
    stream_id: u64,
) -> Result<RunTrace> {
    if horizon == 0 {
        return Err(BanditError::param("horizon must be at least 1"));
    }
    let k = env.num_arms();
    let mut strategy = AnyStrategy::build(spec, k)?;
    let mut rng = SeededRng::new(seed, stream_id);
    let checkpoints = schedule.points(horizon);
    let track = spec.full_support();

    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut arm_variance = Vec::with_capacity(checkpoints.len() * k);
    let mut arm_relaxed_variance = Vec::with_capacity(checkpoints.len() * k);
    let mut arm_policy = Vec::with_capacity(checkpoints.len() * k);
    let mut hat = vec![0.0; k];

    simulate(env, &mut strategy, horizon, &checkpoints, &mut rng, track, |view| {
        let est = view.estimator;
        let t = view.t;
        est.hat_rewards_into(&mut hat)?;
        let best = view.env.best_arm();
        let max_deviation = (0..k)
            .map(|a| ((hat[best] - hat[a]) - view.env.gap(a)).abs())
            .fold(0.0, f64::max);

        let (variance_played, variance_unsmoothed, variance_played_relaxed, lemma2_violations) = if track {
            let played = est.variance_of(view.next_policy)?;
            let relaxed = est.relaxed_variance_of(view.next_policy)?;
            let unsmoothed = match view.unsmoothed {
                Some(rho) => est.variance_of(rho)?,
                None => f64::NAN,
            };
            let violations = match view.floor {
                Some(eps) => {
                    let bound = lemma2_variance_bound(t, eps);
                    est.analytic_variance().iter().filter(|&&v| v > bound).count() as u32
                }
                None => 0,
            };
            arm_variance.extend_from_slice(est.analytic_variance());
            arm_relaxed_variance.extend_from_slice(est.relaxed_variance());
            (played, unsmoothed, relaxed, violations)
        } else {
            arm_variance.extend(std::iter::repeat(f64::NAN).take(k));
            arm_relaxed_variance.extend(std::iter::repeat(f64::NAN).take(k));
            (f64::NAN, f64::NAN, f64::NAN, 0)
        };
        arm_policy.extend_from_slice(view.next_policy.probs());

        let (softmax_empirical_regret, softmax_regret_bound) = match (view.gamma, view.unsmoothed) {
            (Some(gamma), Some(rho)) if gamma.is_finite() && gamma > 0.0 && t >= k as u64 => {
                let gaps: Vec<f64> = (0..k).map(|a| hat[best] - hat[a]).collect();
                (weighted_average(&gaps, rho)?, (k as f64).ln() / gamma)
            }
            _ => (f64::NAN, f64::NAN),
        };

        rows.push(CheckpointRow {
            t,
            pseudo_regret: view.pseudo_regret,
            expected_regret: view.expected_regret,
            variance_played,
            variance_unsmoothed,
            variance_played_relaxed,
            subopt_pulls: view.subopt_pulls,
            floor: view.floor.unwrap_or(f64::NAN),
            min_mass_seen: est.min_mass_seen(),
            max_deviation,
            softmax_empirical_regret,
            softmax_regret_bound,
            lemma2_violations,
        });
        Ok(())
    })?;

    Ok(RunTrace {
        algorithm: spec.label().to_string(),
        seed,
        stream_id,
        num_arms: k,
        rows,
        arm_variance,
        arm_relaxed_variance,
        arm_policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> BernoulliBanditEnv {
        BernoulliBanditEnv::new(vec![0.5, 0.6]).unwrap()
    }

    #[test]
    fn zero_horizon_rejected() {
        let s = CheckpointSchedule::default();
        assert!(run_replication(&env(), &StrategySpec::exp3(), 0, &s, 1, 0).is_err());
    }

    #[test]
    fn replication_is_deterministic() {
        let s = CheckpointSchedule::default();
        for spec in [StrategySpec::exp3(), StrategySpec::exp3p1(0.001), StrategySpec::ucb1()] {
            let a = run_replication(&env(), &spec, 3000, &s, 9, 4).unwrap();
            let b = run_replication(&env(), &spec, 3000, &s, 9, 4).unwrap();
            let bits = |r: &RunTrace| {
                r.rows
                    .iter()
                    .flat_map(|x| [x.pseudo_regret.to_bits(), x.expected_regret.to_bits(), x.variance_played.to_bits()])
                    .collect::<Vec<_>>()
            };
            assert_eq!(bits(&a), bits(&b));
            let c = run_replication(&env(), &spec, 3000, &s, 9, 5).unwrap();
            assert_ne!(bits(&a), bits(&c));
        }
    }

    #[test]
    fn exp3_final_floor() {
        let s = CheckpointSchedule::default();
        let horizon = 10_000;
        let trace = run_replication(&env(), &StrategySpec::exp3(), horizon, &s, 3, 0).unwrap();
        let last = trace.rows.last().unwrap();
        assert_eq!(last.t, horizon);
        let eps_t = 1.0 / (2.0 * horizon as f64).sqrt();
        let policy = trace.arm_policy_at(trace.rows.len() - 1);
        assert!(policy.iter().all(|&p| p >= eps_t));
        assert!(last.min_mass_seen >= eps_t);
        assert!(trace.rows.iter().all(|r| r.lemma2_violations == 0));
        let bound = lemma2_variance_bound(horizon, last.floor);
        for (i, r) in trace.rows.iter().enumerate() {
            assert!(r.variance_played <= r.variance_played_relaxed);
            assert!(trace.arm_relaxed_variance_at(i).iter().all(|&v| v > 0.0));
            if r.t == horizon {
                assert!(trace.arm_relaxed_variance_at(i).iter().all(|&v| v <= bound));
            }
        }
    }

    #[test]
    fn checkpoints_follow_schedule() {
        let s = CheckpointSchedule { dense_until: 10, ratio: 1.5 };
        let trace = run_replication(&env(), &StrategySpec::ucb1(), 100, &s, 1, 0).unwrap();
        assert_eq!(trace.checkpoints().collect::<Vec<_>>(), s.points(100));
        assert!(trace.rows.iter().all(|r| r.variance_played.is_nan()));
        // Point-mass policies: both regret accountings coincide.
        for r in &trace.rows {
            assert!((r.pseudo_regret - r.expected_regret).abs() < 1e-9);
        }
    }

    #[test]
    fn softmax_regret_never_exceeds_its_bound() {
        let s = CheckpointSchedule::default();
        for stream in 0..5 {
            let trace = run_replication(&env(), &StrategySpec::exp3(), 20_000, &s, 12, stream).unwrap();
            for r in trace.rows.iter().filter(|r| !r.softmax_regret_bound.is_nan()) {
                assert!(r.softmax_empirical_regret <= r.softmax_regret_bound);
            }
        }
    }
}
