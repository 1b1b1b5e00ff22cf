//! Per-arm cumulative variance of one EXP3 game against the worst-case
//! bound `2t/ε_t`, and the exact oracle against its `1/π(a) + 1/π(a*)`
//! relaxation.
//!
//! ```text
//! cargo run --release --example variance_diagnostics -- [horizon]
//! ```

use pacbandit::bandit::{BernoulliBanditEnv, RewardEnv, SeededRng};
use pacbandit::bounds::lemma2_variance_bound;
use pacbandit::harness::{simulate, AnyStrategy, CheckpointSchedule};
use pacbandit::strategies::StrategySpec;

fn main() -> pacbandit::Result<()> {
    let horizon: u64 = std::env::args().nth(1).map_or(1_000_000, |s| s.parse().expect("horizon"));
    let env = BernoulliBanditEnv::new(vec![0.5, 0.6])?;
    let k = env.num_arms();
    let mut strategy = AnyStrategy::build(&StrategySpec::exp3(), k)?;
    let mut rng = SeededRng::new(3, 0);
    let checkpoints = CheckpointSchedule { dense_until: 0, ratio: 10.0 }.points(horizon);

    println!(
        "{:>9} {:>12} {:>12} {:>12} {:>12} {:>10}",
        "t", "V(a0)", "relaxed", "2t/eps", "V(rho)/2Kt", "relaxed"
    );
    simulate(&env, &mut strategy, horizon, &checkpoints, &mut rng, true, |view| {
        let est = view.estimator;
        let eps = view.floor.expect("EXP3 has a floor");
        let scale = 2.0 * k as f64 * view.t as f64;
        println!(
            "{:>9} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4} {:>10.4}",
            view.t,
            est.analytic_variance()[0],
            est.relaxed_variance()[0],
            lemma2_variance_bound(view.t, eps),
            est.variance_of(view.next_policy)? / scale,
            est.relaxed_variance_of(view.next_policy)? / scale
        );
        Ok(())
    })?;
    Ok(())
}
