//! One game of EXP3 on a two-armed Bernoulli bandit.
//!
//! ```text
//! cargo run --release --example quickstart -- [horizon] [seed]
//! ```

use pacbandit::bandit::BernoulliBanditEnv;
use pacbandit::harness::{run_replication, CheckpointSchedule};
use pacbandit::strategies::StrategySpec;

fn main() -> pacbandit::Result<()> {
    let mut args = std::env::args().skip(1);
    let horizon: u64 = args.next().map_or(100_000, |s| s.parse().expect("horizon"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let env = BernoulliBanditEnv::new(vec![0.5, 0.6])?;
    let schedule = CheckpointSchedule { dense_until: 10, ratio: 10.0 };
    for spec in [StrategySpec::exp3(), StrategySpec::exp3p1(0.001), StrategySpec::ucb1()] {
        let start = std::time::Instant::now();
        let trace = run_replication(&env, &spec, horizon, &schedule, seed, 0)?;
        println!("{} ({:.2?})", spec.label(), start.elapsed());
        println!("{:>10} {:>12} {:>12} {:>10} {:>12}", "t", "pseudo", "expected", "subopt", "V/(2Kt)");
        for row in &trace.rows {
            println!(
                "{:>10} {:>12.3} {:>12.3} {:>10} {:>12.4}",
                row.t,
                row.pseudo_regret,
                row.expected_regret,
                row.subopt_pulls,
                row.variance_played / (4.0 * row.t as f64)
            );
        }
    }
    Ok(())
}
