//! Deterministic checks of the inequalities behind the regret analysis,
//! one-off and as randomized suites.

use rand::Rng;

use crate::bandit::{ArmDistribution, BernoulliBanditEnv, RewardEnv, SeededRng};
use crate::bounds::kl_divergence;
use crate::error::{BanditError, Result};
use crate::estimators::{weighted_average, EstimatorState};
use crate::strategies::{exp3_weights, smooth};

/// Relative slack for comparisons of quantities computed in floating point.
pub const FLOAT_SLACK: f64 = 1e-12;

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + FLOAT_SLACK * (1.0 + lhs.abs().max(rhs.abs()))
}

fn log_sum_exp(values: impl Iterator<Item = (f64, f64)>) -> f64 {
    // (weight, exponent) pairs with positive weights.
    let pairs: Vec<(f64, f64)> = values.filter(|(w, _)| *w > 0.0).collect();
    let max = pairs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    max + pairs.iter().map(|(w, x)| w * (x - max).exp()).sum::<f64>().ln()
}

/// `(E_ρ[φ], KL(ρ‖μ) + ln E_μ[e^φ])`; the first never exceeds the second.
pub fn change_of_measure_check(phi: &[f64], rho: &ArmDistribution, mu: &ArmDistribution) -> Result<(f64, f64)> {
    if phi.len() != rho.num_arms() {
        return Err(BanditError::LengthMismatch {
            expected: rho.num_arms(),
            got: phi.len(),
        });
    }
    let lhs = weighted_average(phi, rho)?;
    let kl = kl_divergence(rho, mu)?;
    let rhs = kl + log_sum_exp(mu.probs().iter().copied().zip(phi.iter().copied()));
    Ok((lhs, rhs))
}

/// `(R(ρ) − R(ρ̃), Kε)` for the ε-smoothed `ρ̃ = (1 − Kε)ρ + ε`.
pub fn smoothing_gap_check(rho: &ArmDistribution, epsilon: f64, env: &BernoulliBanditEnv) -> Result<(f64, f64)> {
    let k = rho.num_arms();
    if k != env.num_arms() {
        return Err(BanditError::LengthMismatch {
            expected: env.num_arms(),
            got: k,
        });
    }
    let smoothed = smooth(rho, epsilon)?;
    let means = env.biases();
    let gap = weighted_average(means, rho)? - weighted_average(means, &smoothed)?;
    Ok((gap, k as f64 * epsilon))
}

/// `(Σ x_i e^{−αx_i} / Σ e^{−αx_j}, ln(n)/α)` for `x_1 = 0`.
pub fn expsum_bound_check(x: &[f64], alpha: f64) -> Result<(f64, f64)> {
    if x.len() < 2 {
        return Err(BanditError::param("need n >= 2"));
    }
    if x[0] != 0.0 {
        return Err(BanditError::param(format!("x_1 must be 0, got {}", x[0])));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(BanditError::param(format!("alpha {alpha} must be positive")));
    }
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut num, mut den) = (0.0, 0.0);
    for &xi in x {
        let w = (-alpha * (xi - min)).exp();
        num += xi * w;
        den += w;
    }
    Ok((num / den, (x.len() as f64).ln() / alpha))
}

/// `(Δ̂_t(ρ_t^exp), ln K / γ)` where `ρ_t^exp ∝ exp(γ R̂_t)`.
pub fn exp3_empirical_regret_check<E: RewardEnv + ?Sized>(
    state: &EstimatorState,
    env: &E,
    gamma: f64,
) -> Result<(f64, f64)> {
    if state.rounds() == 0 {
        return Err(BanditError::EmptyHistory);
    }
    let hat = state.hat_rewards()?;
    let rho = exp3_weights(&hat, gamma)?;
    let gaps = state.empirical_regrets(env)?;
    Ok((weighted_average(&gaps, &rho)?, (state.num_arms() as f64).ln() / gamma))
}

/// Outcome of one randomized suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: u64,
    pub violations: u64,
    /// Largest `lhs − rhs` seen; negative when every case holds strictly.
    pub worst_margin: f64,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult {
            name,
            cases: 0,
            violations: 0,
            worst_margin: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, (lhs, rhs): (f64, f64)) {
        self.cases += 1;
        if !holds(lhs, rhs) {
            self.violations += 1;
        }
        self.worst_margin = self.worst_margin.max(lhs - rhs);
    }

    pub fn passed(&self) -> bool {
        self.cases > 0 && self.violations == 0
    }
}

fn random_distribution(rng: &mut SeededRng, k: usize, sparse: bool) -> ArmDistribution {
    loop {
        let mut w: Vec<f64> = (0..k)
            .map(|_| {
                if sparse && rng.gen_bool(0.3) {
                    0.0
                } else {
                    // Log-uniform weights reach very peaked distributions.
                    (rng.gen_range(-8.0..1.0f64) * std::f64::consts::LN_10).exp()
                }
            })
            .collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            w.iter_mut().for_each(|x| *x /= s);
            let total: f64 = w.iter().sum();
            if let Some(last) = w.iter_mut().rev().find(|x| **x > 0.0) {
                *last += 1.0 - total;
            }
            if let Ok(d) = ArmDistribution::new(w) {
                return d;
            }
        }
    }
}

fn random_env(rng: &mut SeededRng, k: usize) -> BernoulliBanditEnv {
    let biases = (0..k).map(|_| rng.gen_range(0.0..=1.0)).collect();
    BernoulliBanditEnv::new(biases).expect("biases in [0,1]")
}

/// Random functions `φ` on `|H| ≤ 64` points with random `ρ ≪ μ`.
pub fn change_of_measure_suite(cases: u64, seed: u64) -> Result<SuiteResult> {
    let mut rng = SeededRng::new(seed, 5);
    let mut res = SuiteResult::new("change of measure");
    for _ in 0..cases {
        let n = rng.gen_range(2..=64);
        let mu = random_distribution(&mut rng, n, false);
        let rho = random_distribution(&mut rng, n, true);
        let scale = rng.gen_range(0.1..50.0);
        let phi: Vec<f64> = (0..n).map(|_| rng.gen_range(-scale..scale)).collect();
        res.record(change_of_measure_check(&phi, &rho, &mu)?);
    }
    Ok(res)
}

/// Random `ρ`, environments and admissible `ε ∈ [0, 1/K]`.
pub fn smoothing_gap_suite(cases: u64, seed: u64) -> Result<SuiteResult> {
    let mut rng = SeededRng::new(seed, 6);
    let mut res = SuiteResult::new("smoothing gap");
    for _ in 0..cases {
        let k = rng.gen_range(2..=32);
        let rho = random_distribution(&mut rng, k, true);
        let env = random_env(&mut rng, k);
        let eps = rng.gen_range(0.0..=1.0 / k as f64);
        res.record(smoothing_gap_check(&rho, eps, &env)?);
    }
    Ok(res)
}

/// Random estimator states (including negative empirical gaps) and `γ`.
pub fn softmax_regret_suite(cases: u64, seed: u64) -> Result<SuiteResult> {
    let mut rng = SeededRng::new(seed, 7);
    let mut res = SuiteResult::new("softmax empirical regret");
    for _ in 0..cases {
        let k = rng.gen_range(2..=32);
        let env = random_env(&mut rng, k);
        let t = rng.gen_range(1..=100_000u64);
        let scale = rng.gen_range(0.0..(3.0 * t as f64));
        let sums = (0..k).map(|_| rng.gen_range(0.0..=scale)).collect();
        let state = EstimatorState::from_sums(t, sums);
        let gamma = (rng.gen_range(-3.0..4.0f64) * std::f64::consts::LN_10).exp();
        res.record(exp3_empirical_regret_check(&state, &env, gamma)?);
    }
    Ok(res)
}

/// Random `x` with `x_1 = 0`, `n ≤ 32`, mixed signs, and `α` over six decades.
pub fn expsum_suite(cases: u64, seed: u64) -> Result<SuiteResult> {
    let mut rng = SeededRng::new(seed, 8);
    let mut res = SuiteResult::new("expsum");
    for _ in 0..cases {
        let n = rng.gen_range(2..=32);
        let scale = (rng.gen_range(-2.0..3.0f64) * std::f64::consts::LN_10).exp();
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-scale..scale)).collect();
        x[0] = 0.0;
        if rng.gen_bool(0.2) {
            // The extremal shape: all non-zero entries equal.
            let v = x[1].abs();
            x.iter_mut().skip(1).for_each(|xi| *xi = v);
        }
        let alpha = (rng.gen_range(-3.0..3.0f64) * std::f64::consts::LN_10).exp();
        res.record(expsum_bound_check(&x, alpha)?);
    }
    Ok(res)
}

/// Maximizer of the expsum left-hand side for `n = 3`, `α = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightnessProbe {
    pub x2: f64,
    pub x3: f64,
    pub value: f64,
    pub bound: f64,
}

/// Grid search over `[−5, 10]²` followed by successively finer local grids.
pub fn expsum_tightness_probe() -> TightnessProbe {
    let f = |a: f64, b: f64| (a * (-a).exp() + b * (-b).exp()) / (1.0 + (-a).exp() + (-b).exp());
    let (mut best, mut bx, mut by) = (f64::NEG_INFINITY, 0.0, 0.0);
    let scan = |lo_x: f64, lo_y: f64, step: f64, n: usize, best: &mut f64, bx: &mut f64, by: &mut f64| {
        for i in 0..=n {
            for j in 0..=n {
                let (a, b) = (lo_x + i as f64 * step, lo_y + j as f64 * step);
                let v = f(a, b);
                if v > *best {
                    (*best, *bx, *by) = (v, a, b);
                }
            }
        }
    };
    scan(-5.0, -5.0, 0.01, 1500, &mut best, &mut bx, &mut by);
    let mut step = 0.01;
    for _ in 0..3 {
        // Re-grid [c − step, c + step] at 1/100 of the previous spacing.
        let (cx, cy) = (bx, by);
        scan(cx - step, cy - step, step / 100.0, 200, &mut best, &mut bx, &mut by);
        step /= 100.0;
    }
    TightnessProbe {
        x2: bx,
        x3: by,
        value: best,
        bound: 3f64.ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn change_of_measure_examples() {
        let mu = ArmDistribution::uniform(4).unwrap();
        let rho = ArmDistribution::new(vec![0.7, 0.1, 0.1, 0.1]).unwrap();
        let (lhs, rhs) = change_of_measure_check(&[2.0; 4], &rho, &mu).unwrap();
        assert!((lhs - 2.0).abs() < 1e-12);
        assert!((rhs - (2.0 + kl_divergence(&rho, &mu).unwrap())).abs() < 1e-12);
        let phi = [1.0, -3.0, 0.5, 4.0];
        let (lhs, rhs) = change_of_measure_check(&phi, &mu, &mu).unwrap();
        assert!(rhs - lhs >= 0.0);
        let point = ArmDistribution::point_mass(4, 0).unwrap();
        assert!(change_of_measure_check(&phi, &mu, &point).is_err());
    }

    #[test]
    fn smoothing_gap_examples() {
        let env = BernoulliBanditEnv::new(vec![0.6, 0.5]).unwrap();
        let rho = ArmDistribution::point_mass(2, 0).unwrap();
        let (gap, bound) = smoothing_gap_check(&rho, 0.1, &env).unwrap();
        assert!((gap - 0.01).abs() < 1e-15);
        assert!((bound - 0.2).abs() < 1e-15);
        assert_eq!(smoothing_gap_check(&rho, 0.0, &env).unwrap().0, 0.0);
        let u = ArmDistribution::uniform(2).unwrap();
        assert!(smoothing_gap_check(&u, 0.3, &env).unwrap().0.abs() < 1e-15);
    }

    #[test]
    fn expsum_examples() {
        let (lhs, bound) = expsum_bound_check(&[0.0, 1.0], 1.0).unwrap();
        let e = (-1f64).exp();
        assert!((lhs - e / (1.0 + e)).abs() < 1e-15);
        assert!((lhs - 0.2689414213699951).abs() < 1e-6);
        assert!((bound - 2f64.ln()).abs() < 1e-15);
        assert_eq!(expsum_bound_check(&[0.0; 5], 2.0).unwrap().0, 0.0);
        assert!(expsum_bound_check(&[1.0, 0.0], 1.0).is_err());
        assert!(expsum_bound_check(&[0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn softmax_regret_hand_case() {
        let env = BernoulliBanditEnv::new(vec![0.6, 0.5]).unwrap();
        let state = EstimatorState::from_sums(1, vec![5.0, 0.0]);
        let (v, b) = exp3_empirical_regret_check(&state, &env, 1.0).unwrap();
        let e5 = (-5f64).exp();
        assert!((v - 5.0 * e5 / (1.0 + e5)).abs() < 1e-15);
        assert!((v - 0.0334).abs() < 1e-4);
        assert!(v <= b);
        let flat = EstimatorState::from_sums(10, vec![3.0, 3.0]);
        assert_eq!(exp3_empirical_regret_check(&flat, &env, 2.0).unwrap().0, 0.0);
    }

    #[test]
    fn small_suites_pass() {
        for r in [
            change_of_measure_suite(2000, 1).unwrap(),
            smoothing_gap_suite(2000, 1).unwrap(),
            softmax_regret_suite(2000, 1).unwrap(),
            expsum_suite(2000, 1).unwrap(),
        ] {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn tightness_probe_is_symmetric() {
        let p = expsum_tightness_probe();
        assert!((p.x2 - p.x3).abs() < 1e-3, "{p:?}");
        assert!(p.value < p.bound);
    }
}
