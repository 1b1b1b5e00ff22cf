//! Plugging a user-defined policy into the simulation loop: a fixed-rate
//! explore-then-commit rule, compared with EXP3 on the same random stream.

use pacbandit::bandit::{argmax, ArmDistribution, BernoulliBanditEnv, RewardEnv, RoundRecord, SeededRng};
use pacbandit::estimators::EstimatorState;
use pacbandit::harness::{simulate, AnyStrategy};
use pacbandit::strategies::{Strategy, StrategySpec};

/// Uniform for the first `explore` rounds, then the arm with the largest
/// importance-weighted mean at that point, mixed with a constant floor.
struct ExploreThenCommit {
    explore: u64,
    floor: f64,
    committed: Option<usize>,
    policy: ArmDistribution,
}

impl Strategy for ExploreThenCommit {
    fn label(&self) -> &str {
        "explore-then-commit"
    }

    fn num_arms(&self) -> usize {
        self.policy.num_arms()
    }

    fn policy(&mut self, round: u64, estimates: &EstimatorState) -> pacbandit::Result<&ArmDistribution> {
        let k = self.num_arms();
        let mut probs = vec![1.0 / k as f64; k];
        if round > self.explore {
            let best = match self.committed {
                Some(arm) => arm,
                None => *self.committed.insert(argmax(&estimates.hat_rewards()?)),
            };
            probs = vec![self.floor; k];
            probs[best] += 1.0 - k as f64 * self.floor;
        }
        self.policy.overwrite(&probs)?;
        Ok(&self.policy)
    }

    fn observe(&mut self, _record: &RoundRecord<'_>) -> pacbandit::Result<()> {
        Ok(())
    }

    fn exploration_floor(&self, _round: u64) -> Option<f64> {
        Some(self.floor)
    }
}

fn final_regret<S: Strategy>(env: &BernoulliBanditEnv, strategy: &mut S, horizon: u64) -> pacbandit::Result<f64> {
    let mut rng = SeededRng::new(42, 0);
    let mut regret = 0.0;
    simulate(env, strategy, horizon, &[horizon], &mut rng, false, |view| {
        regret = view.expected_regret;
        Ok(())
    })?;
    Ok(regret)
}

fn main() -> pacbandit::Result<()> {
    let env = BernoulliBanditEnv::new(vec![0.5, 0.6, 0.55])?;
    let horizon = 100_000;
    let mut etc = ExploreThenCommit {
        explore: 2_000,
        floor: 0.001,
        committed: None,
        policy: ArmDistribution::uniform(env.num_arms())?,
    };
    let mut exp3 = AnyStrategy::build(&StrategySpec::exp3(), env.num_arms())?;
    let etc_regret = final_regret(&env, &mut etc, horizon)?;
    let exp3_regret = final_regret(&env, &mut exp3, horizon)?;
    println!("{:<20} {:>10.2}", etc.label(), etc_regret);
    println!("{:<20} {:>10.2}", exp3.label(), exp3_regret);
    Ok(())
}
