//! Empirical coverage of the high-probability bounds over many simulated
//! games.

use rayon::prelude::*;

use crate::bandit::{ArmDistribution, BernoulliBanditEnv, RewardEnv, SeededRng};
use crate::bounds::{
    check_technical_condition_eq1, check_technical_condition_eq5, kl_divergence,
    pac_bayes_bernstein_bound, theorem2_bound, theorem2_lambda,
};
use crate::error::{BanditError, Result};
use crate::harness::{run_replication, simulate, AnyStrategy, CheckpointSchedule};
use crate::strategies::StrategySpec;

/// A batch of independent games of one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub arm_biases: Vec<f64>,
    pub strategy: StrategySpec,
    pub horizon: u64,
    pub runs: u64,
    pub delta: f64,
    pub checkpoints: CheckpointSchedule,
    pub base_seed: u64,
}

impl CoverageConfig {
    /// EXP3 on biases `[0.5, 0.6]`, dense checkpoints up to 1000.
    pub fn exp3(horizon: u64, runs: u64, delta: f64) -> Self {
        CoverageConfig {
            arm_biases: vec![0.5, 0.6],
            strategy: StrategySpec::exp3(),
            horizon,
            runs,
            delta,
            checkpoints: CheckpointSchedule::default(),
            base_seed: 7,
        }
    }

    fn validate(&self) -> Result<BernoulliBanditEnv> {
        let env = BernoulliBanditEnv::new(self.arm_biases.clone())?;
        self.strategy.validate(env.num_arms())?;
        if !self.strategy.full_support() {
            return Err(BanditError::param(format!(
                "{} does not keep an exploration floor",
                self.strategy.label()
            )));
        }
        if self.runs == 0 || self.horizon == 0 {
            return Err(BanditError::param("runs and horizon must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BanditError::param(format!("delta {} outside (0, 1)", self.delta)));
        }
        self.checkpoints.validate()?;
        Ok(env)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageResult {
    pub runs: u64,
    /// Runs with a bound violation at some checked round.
    pub violating_runs: u64,
    /// Checkpoints at which the bound was evaluated, over all runs.
    pub checked_points: u64,
}

impl CoverageResult {
    pub fn frequency(&self) -> f64 {
        self.violating_runs as f64 / self.runs as f64
    }

    /// Three binomial standard errors, at the observed frequency.
    pub fn margin(&self) -> f64 {
        let p = self.frequency();
        3.0 * (p * (1.0 - p) / self.runs as f64).sqrt()
    }

    /// The observed frequency is consistent with a violation rate of at
    /// most `delta`.
    pub fn consistent_with(&self, delta: f64) -> bool {
        let sigma = (delta * (1.0 - delta) / self.runs as f64).sqrt();
        self.frequency() <= delta + 3.0 * sigma
    }
}

fn merge(parts: Vec<(bool, u64)>) -> CoverageResult {
    CoverageResult {
        runs: parts.len() as u64,
        violating_runs: parts.iter().filter(|p| p.0).count() as u64,
        checked_points: parts.iter().map(|p| p.1).sum(),
    }
}

/// Fraction of runs where `max_a |Δ(a) − Δ̂_t(a)|` (the worst `ρ`) exceeds
/// the floor-based deviation bound at some checkpoint that satisfies the
/// technical condition for the strategy's floor.
pub fn theorem2_coverage(cfg: &CoverageConfig) -> Result<CoverageResult> {
    let env = cfg.validate()?;
    let k = env.num_arms();
    let parts = (0..cfg.runs)
        .into_par_iter()
        .map(|stream| {
            let trace = run_replication(&env, &cfg.strategy, cfg.horizon, &cfg.checkpoints, cfg.base_seed, stream)?;
            let (mut violated, mut checked) = (false, 0);
            for row in &trace.rows {
                if !check_technical_condition_eq5(row.t, k, cfg.delta, row.floor) {
                    continue;
                }
                checked += 1;
                if row.max_deviation > theorem2_bound(row.t, k, cfg.delta, row.floor)? {
                    violated = true;
                }
            }
            Ok((violated, checked))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(parts))
}

/// The posterior `ρ_t` used in the PAC-Bayes check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Posterior {
    /// The next policy `π_{t+1}`, a data-dependent choice.
    NextPolicy,
    /// `ρ_t = μ = uniform`, which reduces the check to one scalar martingale.
    Uniform,
}

/// How `λ_t` is fixed before the game starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaRule {
    /// The deviation-bound minimizer, capped at `1/C_t`.
    Theorem2Capped,
    /// A constant, which must satisfy `λ ≤ 1/C_t` at every checkpoint.
    Fixed(f64),
}

/// Fraction of runs where `|M_t(ρ_t)| = t |Δ(ρ_t) − Δ̂_t(ρ_t)|` exceeds the
/// PAC-Bayes-Bernstein bound with `μ` uniform, at some checkpoint.
///
/// The differences `[R^{a*} − R^a] − Δ(a)` are bounded by `C_t = 1/ε_t + 1`.
pub fn theorem1_coverage(cfg: &CoverageConfig, posterior: Posterior, lambda: LambdaRule) -> Result<CoverageResult> {
    let env = cfg.validate()?;
    let k = env.num_arms();
    let mu = ArmDistribution::uniform(k)?;
    let checkpoints = cfg.checkpoints.points(cfg.horizon);
    let parts = (0..cfg.runs)
        .into_par_iter()
        .map(|stream| {
            let mut strategy = AnyStrategy::build(&cfg.strategy, k)?;
            let mut rng = SeededRng::new(cfg.base_seed, stream);
            let (mut violated, mut checked) = (false, 0u64);
            let mut hat = vec![0.0; k];
            simulate(&env, &mut strategy, cfg.horizon, &checkpoints, &mut rng, true, |view| {
                let t = view.t;
                let eps = view.floor.ok_or_else(|| BanditError::param("strategy has no floor"))?;
                let c_t = 1.0 / eps + 1.0;
                let lambda_t = match lambda {
                    LambdaRule::Theorem2Capped => theorem2_lambda(t, k, cfg.delta, eps).min(1.0 / c_t),
                    LambdaRule::Fixed(l) => l,
                };
                if !(lambda_t > 0.0) || !check_technical_condition_eq1(lambda_t, c_t) {
                    return Err(BanditError::param(format!(
                        "lambda {lambda_t} violates lambda <= 1/C_t = {} at t = {t}",
                        1.0 / c_t
                    )));
                }
                let rho = match posterior {
                    Posterior::NextPolicy => view.next_policy,
                    Posterior::Uniform => &mu,
                };
                view.estimator.hat_rewards_into(&mut hat)?;
                let best = view.env.best_arm();
                let m: f64 = (0..k)
                    .map(|a| rho.prob(a) * t as f64 * (view.env.gap(a) - (hat[best] - hat[a])))
                    .sum();
                let v = view.estimator.variance_of(rho)?;
                let kl = kl_divergence(rho, &mu)?;
                let bound = pac_bayes_bernstein_bound(kl, t, cfg.delta, lambda_t, v)?;
                checked += 1;
                if m.abs() > bound {
                    violated = true;
                }
                Ok(())
            })?;
            Ok((violated, checked))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(parts))
}
