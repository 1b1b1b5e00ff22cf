//! Closed-form evaluators for the PAC-Bayes-Bernstein inequality and the
//! bandit bounds derived from it.
//!
//! Everything here is a pure function of its inputs. Technical conditions
//! are reported as flags rather than errors because the experiments
//! deliberately evaluate bounds before the conditions kick in.

use std::collections::BTreeMap;

use crate::bandit::ArmDistribution;
use crate::error::{BanditError, Result};
use crate::strategies::EpsilonSchedule;

/// `e − 2` in full double precision.
pub const E_MINUS_2: f64 = std::f64::consts::E - 2.0;

/// `KL(ρ‖μ) = Σ ρ(a) ln(ρ(a)/μ(a))`, with `0 ln 0 = 0`.
pub fn kl_divergence(rho: &ArmDistribution, mu: &ArmDistribution) -> Result<f64> {
    if rho.num_arms() != mu.num_arms() {
        return Err(BanditError::LengthMismatch {
            expected: mu.num_arms(),
            got: rho.num_arms(),
        });
    }
    let mut kl = 0.0;
    for (a, (&r, &m)) in rho.probs().iter().zip(mu.probs()).enumerate() {
        if r == 0.0 {
            continue;
        }
        if m == 0.0 {
            return Err(BanditError::AbsoluteContinuity { arm: a });
        }
        kl += r * (r / m).ln();
    }
    // Rounding can leave a tiny negative value for ρ ≈ μ.
    Ok(kl.max(0.0))
}

/// `KL + 2 ln(t+1) + ln(2/δ)`: the complexity term shared by every bound.
pub fn complexity(kl: f64, t: u64, delta: f64) -> f64 {
    kl + 2.0 * ((t + 1) as f64).ln() + (2.0 / delta).ln()
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(BanditError::param(format!("delta {delta} outside (0, 1)")))
    }
}

fn check_round(t: u64) -> Result<()> {
    if t >= 1 {
        Ok(())
    } else {
        Err(BanditError::param("bounds are defined for t >= 1"))
    }
}

/// Right-hand side of the PAC-Bayes-Bernstein inequality:
/// `(KL + 2 ln(t+1) + ln(2/δ))/λ + (e−2) λ V`.
pub fn pac_bayes_bernstein_bound(kl: f64, t: u64, delta: f64, lambda: f64, v_rho: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(BanditError::param(format!("lambda must be positive, got {lambda}")));
    }
    if !(v_rho >= 0.0) || !(kl >= 0.0) {
        return Err(BanditError::param("KL and variance must be non-negative"));
    }
    Ok(complexity(kl, t, delta) / lambda + E_MINUS_2 * lambda * v_rho)
}

/// The `λ` minimizing [`pac_bayes_bernstein_bound`]:
/// `√((KL + 2 ln(t+1) + ln(2/δ)) / ((e−2) V))`.
pub fn optimal_lambda(kl: f64, t: u64, delta: f64, v_rho: f64) -> Result<f64> {
    check_round(t)?;
    check_delta(delta)?;
    if !(v_rho > 0.0) || !v_rho.is_finite() {
        return Err(BanditError::param(format!(
            "V = {v_rho}: the minimizing lambda is unbounded"
        )));
    }
    if !(kl >= 0.0) {
        return Err(BanditError::param("KL must be non-negative"));
    }
    Ok((complexity(kl, t, delta) / (E_MINUS_2 * v_rho)).sqrt())
}

/// `2√((e−2) V (KL + 2 ln(t+1) + ln(2/δ)))`: the bound at the optimal `λ`.
pub fn bound_at_optimal_lambda(kl: f64, t: u64, delta: f64, v_rho: f64) -> Result<f64> {
    check_round(t)?;
    check_delta(delta)?;
    if !(v_rho >= 0.0) || !(kl >= 0.0) {
        return Err(BanditError::param("KL and variance must be non-negative"));
    }
    Ok(2.0 * (E_MINUS_2 * v_rho * complexity(kl, t, delta)).sqrt())
}

/// Bound on `|Δ(ρ_t) − Δ̂_t(ρ_t)|` for floor-respecting play:
/// `2√(2(e−2)(ln K + 2 ln(t+1) + ln(2/δ)) / (t ε_t))`.
pub fn theorem2_bound(t: u64, num_arms: usize, delta: f64, epsilon_t: f64) -> Result<f64> {
    check_round(t)?;
    check_delta(delta)?;
    check_epsilon(epsilon_t, num_arms)?;
    let c = complexity((num_arms as f64).ln(), t, delta);
    Ok(2.0 * (2.0 * E_MINUS_2 * c / (t as f64 * epsilon_t)).sqrt())
}

fn check_epsilon(epsilon_t: f64, num_arms: usize) -> Result<()> {
    if num_arms < 2 {
        return Err(BanditError::param("need at least 2 arms"));
    }
    if !(epsilon_t > 0.0) || epsilon_t * num_arms as f64 > 1.0 + 1e-12 {
        return Err(BanditError::param(format!(
            "epsilon {epsilon_t} outside (0, 1/K]"
        )));
    }
    Ok(())
}

/// `(ln K + 2 ln(t+1) + ln(2/δ)) / (2(e−2) t) ≤ ε_t`.
pub fn check_technical_condition_eq5(t: u64, num_arms: usize, delta: f64, epsilon_t: f64) -> bool {
    if t == 0 {
        return false;
    }
    let c = complexity((num_arms as f64).ln(), t, delta);
    c / (2.0 * E_MINUS_2 * t as f64) <= epsilon_t
}

/// `λ_t ≤ 1/C_t`.
pub fn check_technical_condition_eq1(lambda_t: f64, c_t: f64) -> bool {
    lambda_t <= 1.0 / c_t
}

/// The `λ_t` behind [`theorem2_bound`]: the minimizer of the
/// PAC-Bayes-Bernstein bound for `KL = ln K` and `V = 2t/ε_t`, i.e.
/// `√((ln K + 2 ln(t+1) + ln(2/δ)) ε_t / (2(e−2) t))`. With `C_t = 1/ε_t`,
/// `λ_t ≤ 1/C_t` holds exactly when the technical condition does.
pub fn theorem2_lambda(t: u64, num_arms: usize, delta: f64, epsilon_t: f64) -> f64 {
    let c = complexity((num_arms as f64).ln(), t, delta);
    (c * epsilon_t / (2.0 * E_MINUS_2 * t as f64)).sqrt()
}

/// The same expression without the `ε_t` factor, in the form it is usually
/// quoted. Kept for comparison only: it does not reproduce [`theorem2_bound`].
pub fn theorem2_lambda_as_printed(t: u64, num_arms: usize, delta: f64) -> f64 {
    let c = complexity((num_arms as f64).ln(), t, delta);
    (c / (2.0 * E_MINUS_2 * t as f64)).sqrt()
}

/// `V_t(a) ≤ 2t/ε_t`.
pub fn lemma2_variance_bound(t: u64, epsilon_t: f64) -> f64 {
    if t == 0 {
        return 0.0;
    }
    2.0 * t as f64 / epsilon_t
}

/// The three summands of the per-round regret bound, each already scaled
/// by `K^{1/3} / (t+1)^{1/3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem3Terms {
    /// From the `Kε` smoothing gap.
    pub smoothing: f64,
    /// From the `ln K / γ` empirical regret of the softmax.
    pub softmax: f64,
    /// From the concentration bound.
    pub concentration: f64,
}

impl Theorem3Terms {
    pub fn total(&self) -> f64 {
        self.smoothing + self.softmax + self.concentration
    }
}

pub fn theorem3_terms(t: u64, num_arms: usize, delta: f64) -> Theorem3Terms {
    let k = num_arms as f64;
    let scale = k.cbrt() / ((t + 1) as f64).cbrt();
    let c = complexity(k.ln(), t, delta);
    Theorem3Terms {
        smoothing: scale,
        softmax: scale * k.ln().sqrt(),
        concentration: scale * 2.0 * (2.0 * E_MINUS_2 * c).sqrt(),
    }
}

/// `K^{1/3}/(t+1)^{1/3} · (1 + √(ln K) + 2√(2(e−2)(ln K + 2 ln(t+1) + ln(2/δ))))`.
pub fn theorem3_regret_bound(t: u64, num_arms: usize, delta: f64) -> f64 {
    theorem3_terms(t, num_arms, delta).total()
}

/// Smallest `t ≤ max_t` satisfying the technical condition under `schedule`,
/// found by scanning upward.
pub fn eq5_threshold(
    num_arms: usize,
    delta: f64,
    schedule: &EpsilonSchedule,
    max_t: u64,
) -> Option<u64> {
    (1..=max_t).find(|&t| {
        check_technical_condition_eq5(t, num_arms, delta, schedule.value(t, num_arms))
    })
}

/// Inputs of a bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub t: u64,
    pub num_arms: usize,
    pub delta: f64,
    pub lambda_t: f64,
    pub epsilon_t: f64,
    pub gamma_t: f64,
    pub c_t: f64,
}

impl BoundParams {
    /// Parameters for the bandit martingales at round `t`: `λ_t` from
    /// [`theorem2_lambda`] and `C_t = 1/ε_t`.
    pub fn for_bandit(t: u64, num_arms: usize, delta: f64, epsilon_t: f64, gamma_t: f64) -> Result<Self> {
        check_round(t)?;
        check_delta(delta)?;
        check_epsilon(epsilon_t, num_arms)?;
        if !(gamma_t > 0.0) {
            return Err(BanditError::param(format!("gamma {gamma_t} must be positive")));
        }
        Ok(BoundParams {
            t,
            num_arms,
            delta,
            lambda_t: theorem2_lambda(t, num_arms, delta, epsilon_t),
            epsilon_t,
            gamma_t,
            c_t: 1.0 / epsilon_t,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: &'static str,
    pub bound_value: f64,
    pub condition_flags: BTreeMap<&'static str, bool>,
    pub inputs: BoundParams,
    pub kl_value: f64,
}

/// Every bound that applies to the bandit at `params`.
pub fn bandit_reports(params: &BoundParams) -> Result<Vec<BoundReport>> {
    let BoundParams {
        t,
        num_arms,
        delta,
        lambda_t,
        epsilon_t,
        gamma_t,
        c_t,
    } = *params;
    let ln_k = (num_arms as f64).ln();
    let eq1 = check_technical_condition_eq1(lambda_t, c_t);
    let eq5 = check_technical_condition_eq5(t, num_arms, delta, epsilon_t);
    let variance = lemma2_variance_bound(t, epsilon_t);

    let mut reports = Vec::new();
    let flags = |pairs: &[(&'static str, bool)]| pairs.iter().copied().collect::<BTreeMap<_, _>>();

    reports.push(BoundReport {
        name: "pac_bayes_bernstein",
        bound_value: pac_bayes_bernstein_bound(ln_k, t, delta, lambda_t, variance)?,
        condition_flags: flags(&[("eq1", eq1)]),
        inputs: *params,
        kl_value: ln_k,
    });
    reports.push(BoundReport {
        name: "theorem2",
        bound_value: theorem2_bound(t, num_arms, delta, epsilon_t)?,
        condition_flags: flags(&[("eq1", eq1), ("eq5", eq5)]),
        inputs: *params,
        kl_value: ln_k,
    });
    reports.push(BoundReport {
        name: "lemma2_variance",
        bound_value: variance,
        condition_flags: BTreeMap::new(),
        inputs: *params,
        kl_value: ln_k,
    });
    reports.push(BoundReport {
        name: "lemma7_softmax_regret",
        bound_value: ln_k / gamma_t,
        condition_flags: BTreeMap::new(),
        inputs: *params,
        kl_value: ln_k,
    });
    let schedule_eps = EpsilonSchedule::Theorem3.value(t, num_arms);
    let gamma_min = (num_arms as f64).powf(-1.0 / 3.0) * (t as f64).cbrt() * ln_k.sqrt();
    reports.push(BoundReport {
        name: "theorem3_regret",
        bound_value: theorem3_regret_bound(t, num_arms, delta),
        condition_flags: flags(&[
            ("eq5_theorem3_schedule", check_technical_condition_eq5(t, num_arms, delta, schedule_eps)),
            ("gamma_at_least_minimum", gamma_t >= gamma_min),
        ]),
        inputs: *params,
        kl_value: ln_k,
    });
    Ok(reports)
}
