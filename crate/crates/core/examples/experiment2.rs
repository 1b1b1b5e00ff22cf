//! The long game: EXP3, EXP3.P.1 and UCB1 over 10^6 rounds (desk scale) or
//! 10^7 rounds (`--full`). Prints where UCB1 overtakes EXP3 and the EXP3
//! variance ratio.
//!
//! ```text
//! cargo run --release --example experiment2 -- [--full] [out_dir]
//! ```

use std::path::PathBuf;

use pacbandit::harness::{run_experiment, write_outputs, ExperimentConfig, RegretMode, SeriesSelection};

fn main() -> pacbandit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let full = args.iter().any(|a| a == "--full");
    let cfg = if full { ExperimentConfig::exp2() } else { ExperimentConfig::exp2_desk() };
    let out = args
        .iter()
        .find(|a| !a.starts_with("--"))
        .map(PathBuf::from)
        .unwrap_or_else(|| cfg.output_dir.clone());

    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let summaries = run_experiment(&cfg, workers)?;
    write_outputs(&cfg, &summaries, &out, RegretMode::Pseudo, &SeriesSelection::default())?;

    let find = |name: &str| summaries.iter().find(|s| s.algorithm == name).expect("configured");
    let (exp3, ucb1) = (find("EXP3"), find("UCB1"));
    // First checkpoint after which UCB1 stays below EXP3.
    let crossover = exp3
        .rows
        .iter()
        .zip(&ucb1.rows)
        .rev()
        .take_while(|(e, u)| u.pseudo_regret_mean < e.pseudo_regret_mean)
        .last()
        .map(|(e, _)| e.checkpoint_t);
    match crossover {
        Some(t) => println!("UCB1 below EXP3 from t = {t} on"),
        None => println!("UCB1 does not overtake EXP3 by t = {}", cfg.horizon),
    }
    for row in exp3.rows.iter().filter(|r| r.checkpoint_t.is_power_of_two() || r.checkpoint_t == cfg.horizon) {
        println!("t = {:>9}  V/(2Kt) = {:.4}", row.checkpoint_t, row.norm_variance_mean);
    }
    println!("outputs in {}", out.display());
    Ok(())
}
