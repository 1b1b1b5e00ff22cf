//! Stochastic multiarmed bandits with importance-weighted EXP3, evaluated
//! through PAC-Bayes-Bernstein concentration and regret bounds.
//!
//! * [`bandit`]: arm distributions, Bernoulli environment, seeded streams.
//! * [`estimators`]: importance-weighted rewards and cumulative variances.
//! * [`strategies`]: the EXP3 / ε-greedy spectrum, EXP3.P.1 and UCB1.
//! * [`bounds`]: closed-form bound evaluators and technical conditions.
//! * [`lab`]: numeric falsification attempts for the supporting lemmas and
//!   coverage experiments.
//! * [`harness`]: config-driven replications, aggregation, CSV and plots.

pub mod bandit;
pub mod bounds;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod lab;
pub mod strategies;

pub use error::{BanditError, Result};
