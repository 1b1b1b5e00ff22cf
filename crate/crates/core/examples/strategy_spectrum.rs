//! The EXP3 family from a soft softmax to ε-greedy: the same floor schedule
//! with increasing inverse temperature.
//!
//! ```text
//! cargo run --release --example strategy_spectrum -- [horizon] [replications]
//! ```

use pacbandit::harness::{run_experiment, CheckpointSchedule, ExperimentConfig};
use pacbandit::strategies::{EpsilonSchedule, Exp3SpectrumParams, GammaSchedule, StrategySpec};

fn exp3(label: &str, gamma: GammaSchedule) -> StrategySpec {
    StrategySpec::Exp3 {
        label: label.into(),
        params: Exp3SpectrumParams {
            epsilon: EpsilonSchedule::Experiment,
            gamma,
        },
    }
}

fn main() -> pacbandit::Result<()> {
    let mut args = std::env::args().skip(1);
    let horizon: u64 = args.next().map_or(100_000, |s| s.parse().expect("horizon"));
    let replications: u64 = args.next().map_or(50, |s| s.parse().expect("replications"));

    let cfg = ExperimentConfig {
        name: "spectrum".into(),
        horizon,
        replications,
        algorithms: vec![
            exp3("gamma=t^(1/3)", GammaSchedule::Power { scale: 1.0, k_exp: 0.0, t_exp: 1.0 / 3.0 }),
            exp3("gamma=sqrt(t lnK/K)", GammaSchedule::Experiment),
            exp3("gamma=1/eps", GammaSchedule::InverseEpsilon),
            exp3("gamma=t", GammaSchedule::Power { scale: 1.0, k_exp: 0.0, t_exp: 1.0 }),
            exp3("eps-greedy", GammaSchedule::Infinity),
            StrategySpec::Exp3 { label: "theorem schedules".into(), params: Exp3SpectrumParams::theorem3() },
        ],
        checkpoints: CheckpointSchedule { dense_until: 0, ratio: 10.0 },
        ..ExperimentConfig::exp1()
    };
    let summaries = run_experiment(&cfg, std::thread::available_parallelism().map_or(1, |n| n.get()))?;
    println!("{:<20} {:>12} {:>10} {:>10}", "strategy", "regret", "std", "V/(2Kt)");
    for s in &summaries {
        let last = s.rows.last().expect("horizon checkpoint");
        println!(
            "{:<20} {:>12.2} {:>10.2} {:>10.4}",
            s.algorithm, last.pseudo_regret_mean, last.pseudo_regret_std, last.norm_variance_mean
        );
    }
    Ok(())
}
