use crate::bandit::{argmax, ArmDistribution, RoundRecord};
use crate::error::{BanditError, Result};
use crate::estimators::EstimatorState;

use super::Strategy;

/// Rule producing the exploration floor `ε_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSchedule {
    /// `K^{-2/3} t^{-1/3}`.
    Theorem3,
    /// `1/√(Kt)`.
    Experiment,
    /// `scale · K^{k_exp} · t^{t_exp}` with `t_exp < 0`.
    Power { scale: f64, k_exp: f64, t_exp: f64 },
}

impl EpsilonSchedule {
    pub fn value(&self, t: u64, num_arms: usize) -> f64 {
        let (t, k) = (t as f64, num_arms as f64);
        match *self {
            EpsilonSchedule::Theorem3 => k.powf(-2.0 / 3.0) * t.powf(-1.0 / 3.0),
            EpsilonSchedule::Experiment => 1.0 / (k * t).sqrt(),
            EpsilonSchedule::Power {
                scale,
                k_exp,
                t_exp,
            } => scale * k.powf(k_exp) * t.powf(t_exp),
        }
    }
}

/// Rule producing the inverse temperature `γ_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSchedule {
    /// `K^{-1/3} t^{1/3} √(ln K)`, the smallest value the regret theorem allows.
    Theorem3Minimum,
    /// `√(t ln K / K)`.
    Experiment,
    /// `1/ε_t`, the classical EXP3 coupling.
    InverseEpsilon,
    /// `γ → ∞`: ε-greedy.
    Infinity,
    /// `scale · K^{k_exp} · t^{t_exp}`.
    Power { scale: f64, k_exp: f64, t_exp: f64 },
}

impl GammaSchedule {
    pub fn value(&self, t: u64, num_arms: usize, epsilon: &EpsilonSchedule) -> f64 {
        let (tf, k) = (t as f64, num_arms as f64);
        match *self {
            GammaSchedule::Theorem3Minimum => theorem3_min_gamma(t, num_arms),
            GammaSchedule::Experiment => (tf * k.ln() / k).sqrt(),
            GammaSchedule::InverseEpsilon => 1.0 / epsilon.value(t, num_arms),
            GammaSchedule::Infinity => f64::INFINITY,
            GammaSchedule::Power {
                scale,
                k_exp,
                t_exp,
            } => scale * k.powf(k_exp) * tf.powf(t_exp),
        }
    }
}

fn theorem3_min_gamma(t: u64, num_arms: usize) -> f64 {
    let k = num_arms as f64;
    k.powf(-1.0 / 3.0) * (t as f64).powf(1.0 / 3.0) * k.ln().sqrt()
}

/// Parameters of the EXP3 / ε-greedy spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp3SpectrumParams {
    pub epsilon: EpsilonSchedule,
    pub gamma: GammaSchedule,
}

impl Exp3SpectrumParams {
    /// The schedules used in the two simulation studies.
    pub fn experiment() -> Self {
        Exp3SpectrumParams {
            epsilon: EpsilonSchedule::Experiment,
            gamma: GammaSchedule::Experiment,
        }
    }

    pub fn theorem3() -> Self {
        Exp3SpectrumParams {
            epsilon: EpsilonSchedule::Theorem3,
            gamma: GammaSchedule::Theorem3Minimum,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let EpsilonSchedule::Power { scale, t_exp, .. } = self.epsilon {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(BanditError::param(format!("epsilon scale {scale} must be positive")));
            }
            if !(t_exp < 0.0) {
                return Err(BanditError::param(format!(
                    "epsilon t-exponent {t_exp} must be negative (decreasing floor)"
                )));
            }
        }
        if let GammaSchedule::Power { scale, .. } = self.gamma {
            if !(scale >= 0.0 && scale.is_finite()) {
                return Err(BanditError::param(format!("gamma scale {scale} must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn epsilon_at(&self, t: u64, num_arms: usize) -> Result<f64> {
        let eps = self.epsilon.value(t, num_arms);
        if !(eps >= 0.0) || num_arms as f64 * eps > 1.0 {
            return Err(BanditError::param(format!(
                "K·ε_{t} = {} exceeds 1",
                num_arms as f64 * eps
            )));
        }
        Ok(eps)
    }

    /// `γ_t`, enforcing the regret theorem's lower bound when the theorem's
    /// floor schedule is in use.
    pub fn gamma_at(&self, t: u64, num_arms: usize) -> Result<f64> {
        let gamma = self.gamma.value(t, num_arms, &self.epsilon);
        if !(gamma >= 0.0) {
            return Err(BanditError::param(format!("γ_{t} = {gamma} is negative")));
        }
        if self.epsilon == EpsilonSchedule::Theorem3 {
            let min = theorem3_min_gamma(t, num_arms);
            if gamma < min {
                return Err(BanditError::param(format!(
                    "γ_{t} = {gamma} below K^(-1/3) t^(1/3) √(ln K) = {min}"
                )));
            }
        }
        Ok(gamma)
    }
}

/// Softmax of `γ · hat_r`, written into `out`. The maximum is subtracted
/// first, which leaves the result unchanged and keeps the exponentials finite.
pub(crate) fn softmax_into(hat_r: &[f64], gamma: f64, out: &mut [f64]) {
    let max = hat_r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for (o, &r) in out.iter_mut().zip(hat_r) {
        *o = (gamma * (r - max)).exp();
        z += *o;
    }
    let inv = 1.0 / z;
    out.iter_mut().for_each(|o| *o *= inv);
}

/// `ρ^exp(a) ∝ exp(γ R̂(a))`.
pub fn exp3_weights(hat_r: &[f64], gamma: f64) -> Result<ArmDistribution> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(BanditError::param(format!(
            "gamma must be finite and non-negative, got {gamma}; use epsilon_greedy_policy for the limit"
        )));
    }
    if hat_r.iter().any(|r| !r.is_finite()) {
        return Err(BanditError::param("non-finite reward estimate"));
    }
    let mut out = vec![0.0; hat_r.len()];
    softmax_into(hat_r, gamma, &mut out);
    ArmDistribution::new(out)
}

fn check_smoothing(num_arms: usize, epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0) || num_arms as f64 * epsilon > 1.0 {
        return Err(BanditError::param(format!(
            "need 0 <= K·ε <= 1, got K = {num_arms}, ε = {epsilon}"
        )));
    }
    Ok(())
}

pub(crate) fn smooth_in_place(probs: &mut [f64], epsilon: f64) {
    let scale = 1.0 - probs.len() as f64 * epsilon;
    probs.iter_mut().for_each(|p| *p = scale * *p + epsilon);
}

/// `ρ̃(a) = (1 − Kε) ρ(a) + ε`.
pub fn smooth(rho: &ArmDistribution, epsilon: f64) -> Result<ArmDistribution> {
    check_smoothing(rho.num_arms(), epsilon)?;
    let mut probs = rho.probs().to_vec();
    smooth_in_place(&mut probs, epsilon);
    ArmDistribution::new(probs)
}

pub(crate) fn epsilon_greedy_into(hat_r: &[f64], epsilon: f64, out: &mut [f64]) {
    let best = argmax(hat_r);
    out.iter_mut().for_each(|p| *p = 0.0);
    out[best] = 1.0;
    smooth_in_place(out, epsilon);
}

/// Mass `1 − (K−1)ε` on the empirical leader, `ε` on every other arm.
pub fn epsilon_greedy_policy(hat_r: &[f64], epsilon: f64, num_arms: usize) -> Result<ArmDistribution> {
    if hat_r.len() != num_arms {
        return Err(BanditError::LengthMismatch {
            expected: num_arms,
            got: hat_r.len(),
        });
    }
    check_smoothing(num_arms, epsilon)?;
    let mut out = vec![0.0; num_arms];
    epsilon_greedy_into(hat_r, epsilon, &mut out);
    ArmDistribution::new(out)
}

/// The policy for round `round` (1-based) given the estimates of the first
/// `round − 1` rounds.
///
/// The first `K` rounds are played uniformly. From then on the round after
/// `t` plays `smooth(exp3_weights(R̂_t, γ_t), ε_{t+1})`.
pub fn theorem3_policy(
    state: &EstimatorState,
    round: u64,
    params: &Exp3SpectrumParams,
) -> Result<ArmDistribution> {
    let mut core = Exp3Core::new(state.num_arms(), *params)?;
    core.compute(state, round)?;
    Ok(core.policy)
}

/// Buffers and parameters shared by the free function and the strategy.
#[derive(Debug, Clone)]
struct Exp3Core {
    params: Exp3SpectrumParams,
    num_arms: usize,
    hat: Vec<f64>,
    scratch: Vec<f64>,
    unsmoothed: ArmDistribution,
    policy: ArmDistribution,
}

impl Exp3Core {
    fn new(num_arms: usize, params: Exp3SpectrumParams) -> Result<Self> {
        params.validate()?;
        let uniform = ArmDistribution::uniform(num_arms)?;
        Ok(Exp3Core {
            params,
            num_arms,
            hat: vec![0.0; num_arms],
            scratch: vec![0.0; num_arms],
            unsmoothed: uniform.clone(),
            policy: uniform,
        })
    }

    fn compute(&mut self, state: &EstimatorState, round: u64) -> Result<()> {
        if round == 0 {
            return Err(BanditError::param("rounds are numbered from 1"));
        }
        if state.num_arms() != self.num_arms {
            return Err(BanditError::LengthMismatch {
                expected: self.num_arms,
                got: state.num_arms(),
            });
        }
        let k = self.num_arms;
        if round <= k as u64 {
            let u = 1.0 / k as f64;
            self.scratch.iter_mut().for_each(|p| *p = u);
            self.unsmoothed.overwrite(&self.scratch)?;
            self.policy.overwrite(&self.scratch)?;
            return Ok(());
        }
        let t = round - 1;
        if state.rounds() != t {
            return Err(BanditError::OutOfOrder {
                expected: t,
                got: state.rounds(),
            });
        }
        state.hat_rewards_into(&mut self.hat)?;
        let epsilon = self.params.epsilon_at(round, k)?;
        let gamma = self.params.gamma_at(t, k)?;
        if gamma.is_infinite() {
            let best = argmax(&self.hat);
            self.scratch.iter_mut().for_each(|p| *p = 0.0);
            self.scratch[best] = 1.0;
            self.unsmoothed.overwrite(&self.scratch)?;
            epsilon_greedy_into(&self.hat, epsilon, &mut self.scratch);
        } else {
            softmax_into(&self.hat, gamma, &mut self.scratch);
            self.unsmoothed.overwrite(&self.scratch)?;
            smooth_in_place(&mut self.scratch, epsilon);
        }
        self.policy.overwrite(&self.scratch)
    }
}

/// EXP3 with ε-smoothing, covering the whole spectrum up to ε-greedy.
#[derive(Debug, Clone)]
pub struct Exp3Strategy {
    label: String,
    core: Exp3Core,
}

impl Exp3Strategy {
    pub fn new(label: impl Into<String>, num_arms: usize, params: Exp3SpectrumParams) -> Result<Self> {
        Ok(Exp3Strategy {
            label: label.into(),
            core: Exp3Core::new(num_arms, params)?,
        })
    }

    pub fn params(&self) -> &Exp3SpectrumParams {
        &self.core.params
    }
}

impl Strategy for Exp3Strategy {
    fn label(&self) -> &str {
        &self.label
    }

    fn num_arms(&self) -> usize {
        self.core.num_arms
    }

    fn policy(&mut self, round: u64, estimates: &EstimatorState) -> Result<&ArmDistribution> {
        self.core.compute(estimates, round)?;
        Ok(&self.core.policy)
    }

    fn observe(&mut self, _record: &RoundRecord<'_>) -> Result<()> {
        // All state lives in the shared estimator.
        Ok(())
    }

    fn exploration_floor(&self, round: u64) -> Option<f64> {
        exp3_floor(&self.core.params, self.core.num_arms, round)
    }

    fn unsmoothed(&self) -> Option<&ArmDistribution> {
        Some(&self.core.unsmoothed)
    }

    fn inverse_temperature(&self, t: u64) -> Option<f64> {
        self.core.params.gamma_at(t, self.core.num_arms).ok()
    }
}

/// `ε_round` for the smoothed rounds; the uniform warm-start rounds have the
/// larger floor `1/K` but reporting `ε_round` keeps the sequence decreasing.
pub(crate) fn exp3_floor(params: &Exp3SpectrumParams, num_arms: usize, round: u64) -> Option<f64> {
    let eps = params.epsilon.value(round.max(1), num_arms);
    Some(eps.min(1.0 / num_arms as f64))
}
