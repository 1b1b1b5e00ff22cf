//! Policy-producing algorithms: the EXP3 spectrum and the EXP3.P.1 and
//! UCB1 baselines.

mod exp3;
mod exp3p;
mod ucb1;

pub use exp3::{
    epsilon_greedy_policy, exp3_weights, smooth, theorem3_policy, EpsilonSchedule,
    Exp3SpectrumParams, Exp3Strategy, GammaSchedule,
};
pub use exp3p::{epoch_of, first_epoch_index, Exp3P1Strategy, Exp3PEpoch};
pub use ucb1::{ucb1_policy, Ucb1Strategy};

use crate::bandit::{ArmDistribution, RoundRecord};
use crate::error::Result;
use crate::estimators::EstimatorState;

/// A bandit strategy driven round by round.
///
/// `policy(round, ..)` is called once per round with the estimator holding
/// rounds `1..round`, then `observe` with the outcome of that round.
pub trait Strategy {
    fn label(&self) -> &str;

    fn num_arms(&self) -> usize;

    fn policy(&mut self, round: u64, estimates: &EstimatorState) -> Result<&ArmDistribution>;

    fn observe(&mut self, record: &RoundRecord<'_>) -> Result<()>;

    /// Guaranteed minimal probability of every arm at `round`, if any.
    /// Non-increasing in `round` for every strategy that has one.
    fn exploration_floor(&self, round: u64) -> Option<f64>;

    /// Distribution before mixing in the exploration floor, for the most
    /// recently emitted policy.
    fn unsmoothed(&self) -> Option<&ArmDistribution> {
        None
    }

    /// `γ_t` for softmax strategies.
    fn inverse_temperature(&self, _t: u64) -> Option<f64> {
        None
    }
}

/// A strategy by name and parameters, as read from a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategySpec {
    Exp3 {
        label: String,
        params: Exp3SpectrumParams,
    },
    Exp3P1 {
        label: String,
        delta: f64,
    },
    Ucb1 {
        label: String,
    },
}

impl StrategySpec {
    pub fn exp3() -> Self {
        StrategySpec::Exp3 {
            label: "EXP3".into(),
            params: Exp3SpectrumParams::experiment(),
        }
    }

    pub fn exp3p1(delta: f64) -> Self {
        StrategySpec::Exp3P1 {
            label: "EXP3.P.1".into(),
            delta,
        }
    }

    pub fn ucb1() -> Self {
        StrategySpec::Ucb1 {
            label: "UCB1".into(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            StrategySpec::Exp3 { label, .. }
            | StrategySpec::Exp3P1 { label, .. }
            | StrategySpec::Ucb1 { label } => label,
        }
    }

    /// Whether every emitted policy has full support, which is what the
    /// importance-weighted variance needs.
    pub fn full_support(&self) -> bool {
        !matches!(self, StrategySpec::Ucb1 { .. })
    }

    pub fn validate(&self, num_arms: usize) -> Result<()> {
        match self {
            StrategySpec::Exp3 { label, params } => {
                Exp3Strategy::new(label.clone(), num_arms, *params).map(|_| ())
            }
            StrategySpec::Exp3P1 { label, delta } => {
                Exp3P1Strategy::new(label.clone(), num_arms, *delta).map(|_| ())
            }
            StrategySpec::Ucb1 { label } => Ucb1Strategy::new(label.clone(), num_arms).map(|_| ()),
        }
    }

    pub fn exploration_floor(&self, num_arms: usize, round: u64) -> Option<f64> {
        match self {
            StrategySpec::Exp3 { params, .. } => exp3::exp3_floor(params, num_arms, round),
            StrategySpec::Exp3P1 { delta, .. } => {
                Some(epoch_of(round, num_arms, *delta).floor(num_arms))
            }
            StrategySpec::Ucb1 { .. } => None,
        }
    }
}
