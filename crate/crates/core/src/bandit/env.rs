use super::{argmax, ArmDistribution, SeededRng};
use crate::error::{BanditError, Result};

/// A stochastic environment with rewards bounded in `[0, 1]`.
///
/// The estimators only need the first two conditional moments of each
/// arm, so any bounded reward family can be plugged in here.
pub trait RewardEnv {
    fn num_arms(&self) -> usize;

    /// Expected reward `R(a)`.
    fn mean(&self, arm: usize) -> f64;

    /// `E[R² | a]`.
    fn second_moment(&self, arm: usize) -> f64;

    /// The best arm `a*`.
    fn best_arm(&self) -> usize;

    fn draw_reward(&self, arm: usize, rng: &mut SeededRng) -> Result<f64>;

    /// Gap `Δ(a) = R(a*) − R(a)`.
    fn gap(&self, arm: usize) -> f64 {
        self.mean(self.best_arm()) - self.mean(arm)
    }
}

/// `K` Bernoulli arms with the given biases.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliBanditEnv {
    biases: Vec<f64>,
    best_arm: usize,
    gaps: Vec<f64>,
}

impl BernoulliBanditEnv {
    pub fn new(biases: Vec<f64>) -> Result<Self> {
        if biases.len() < 2 {
            return Err(BanditError::param(format!(
                "need at least 2 arms, got {}",
                biases.len()
            )));
        }
        if let Some(b) = biases.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(BanditError::param(format!("bias {b} outside [0, 1]")));
        }
        let best_arm = argmax(&biases);
        let gaps = biases.iter().map(|b| biases[best_arm] - b).collect();
        Ok(BernoulliBanditEnv {
            biases,
            best_arm,
            gaps,
        })
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }
}

impl RewardEnv for BernoulliBanditEnv {
    #[inline]
    fn num_arms(&self) -> usize {
        self.biases.len()
    }

    #[inline]
    fn mean(&self, arm: usize) -> f64 {
        self.biases[arm]
    }

    #[inline]
    fn second_moment(&self, arm: usize) -> f64 {
        // R ∈ {0, 1} so R² = R.
        self.biases[arm]
    }

    #[inline]
    fn best_arm(&self) -> usize {
        self.best_arm
    }

    #[inline]
    fn draw_reward(&self, arm: usize, rng: &mut SeededRng) -> Result<f64> {
        let bias = *self.biases.get(arm).ok_or(BanditError::InvalidArm {
            arm,
            num_arms: self.biases.len(),
        })?;
        Ok(if rng.next_unit() < bias { 1.0 } else { 0.0 })
    }

    #[inline]
    fn gap(&self, arm: usize) -> f64 {
        self.gaps[arm]
    }
}

/// Expected per-round regret `Δ(ρ) = Σ_a ρ(a) Δ(a)` of a policy.
pub fn expected_regret_of_policy<E: RewardEnv + ?Sized>(
    env: &E,
    policy: &ArmDistribution,
) -> Result<f64> {
    if policy.num_arms() != env.num_arms() {
        return Err(BanditError::LengthMismatch {
            expected: env.num_arms(),
            got: policy.num_arms(),
        });
    }
    Ok(policy
        .probs()
        .iter()
        .enumerate()
        .map(|(a, p)| p * env.gap(a))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn env() -> BernoulliBanditEnv {
        BernoulliBanditEnv::new(vec![0.5, 0.6]).unwrap()
    }

    #[test]
    fn best_arm_lowest_index_on_ties() {
        let e = BernoulliBanditEnv::new(vec![0.2, 0.7, 0.7]).unwrap();
        assert_eq!(e.best_arm(), 1);
        assert!(e.gaps().iter().all(|&g| g >= 0.0));
        assert_eq!(env().best_arm(), 1);
    }

    #[test]
    fn rejects_bad_biases() {
        assert!(BernoulliBanditEnv::new(vec![0.5]).is_err());
        assert!(BernoulliBanditEnv::new(vec![0.5, 1.2]).is_err());
    }

    #[test]
    fn degenerate_biases() {
        let e = BernoulliBanditEnv::new(vec![0.0, 1.0]).unwrap();
        let mut rng = SeededRng::new(1, 0);
        for _ in 0..10_000 {
            assert_eq!(e.draw_reward(0, &mut rng).unwrap(), 0.0);
            assert_eq!(e.draw_reward(1, &mut rng).unwrap(), 1.0);
        }
    }

    #[test]
    fn bernoulli_mean() {
        let e = env();
        let mut rng = SeededRng::new(2024, 0);
        let n = 1_000_000;
        let sum: f64 = (0..n).map(|_| e.draw_reward(1, &mut rng).unwrap()).sum();
        let mean = sum / n as f64;
        assert!((0.5985..=0.6015).contains(&mean), "mean = {mean}");
    }

    #[test]
    fn invalid_arm_rejected() {
        let mut rng = SeededRng::new(1, 0);
        assert!(matches!(
            env().draw_reward(2, &mut rng),
            Err(BanditError::InvalidArm { arm: 2, .. })
        ));
    }

    #[test]
    fn expected_regret_examples() {
        let e = env();
        let u = ArmDistribution::uniform(2).unwrap();
        assert!((expected_regret_of_policy(&e, &u).unwrap() - 0.05).abs() < 1e-15);
        let p = ArmDistribution::point_mass(2, 0).unwrap();
        assert!((expected_regret_of_policy(&e, &p).unwrap() - 0.1).abs() < 1e-15);
        let p = ArmDistribution::point_mass(2, 1).unwrap();
        assert_eq!(expected_regret_of_policy(&e, &p).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn zero_regret_iff_mass_on_best(
            raw in proptest::collection::vec(0.0f64..1.0, 2..6),
            weights in proptest::collection::vec(0.0f64..1.0, 6),
            tie in any::<bool>(),
        ) {
            let mut biases = raw.clone();
            if tie {
                let m = biases.iter().cloned().fold(f64::MIN, f64::max);
                let last = biases.len() - 1;
                biases[last] = m;
            }
            let e = BernoulliBanditEnv::new(biases.clone()).unwrap();
            let k = biases.len();
            let mut w: Vec<f64> = weights[..k].to_vec();
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-6);
            w.iter_mut().for_each(|x| *x /= total);
            let r = expected_regret_of_policy(&e, &ArmDistribution::new(w.clone()).unwrap()).unwrap();
            prop_assert!(r >= 0.0);
            let max = biases[e.best_arm()];
            let off_best = w.iter().zip(&biases).any(|(p, b)| *p > 0.0 && *b < max);
            prop_assert_eq!(r == 0.0, !off_best);
        }
    }
}
