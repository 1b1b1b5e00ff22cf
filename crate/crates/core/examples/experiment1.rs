//! The two-armed game at 10^4 rounds, every algorithm, 1000 repetitions.
//! Writes `summary.csv`, `arms.csv` and the two SVG panels.
//!
//! ```text
//! cargo run --release --example experiment1 -- [out_dir] [replications]
//! ```

use std::path::PathBuf;

use pacbandit::harness::{run_experiment, write_outputs, ExperimentConfig, RegretMode, SeriesSelection};

fn main() -> pacbandit::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/exp1".into()));
    let mut cfg = ExperimentConfig::exp1();
    if let Some(m) = args.next() {
        cfg.replications = m.parse().expect("replications");
    }

    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let start = std::time::Instant::now();
    let summaries = run_experiment(&cfg, workers)?;
    println!("{} replications in {:.1?}", cfg.replications, start.elapsed());

    for s in &summaries {
        let last = s.rows.last().expect("non-empty schedule");
        println!(
            "{:<9} regret {:>8.2} ± {:>6.2} (sem {:.2})",
            s.algorithm,
            last.pseudo_regret_mean,
            last.pseudo_regret_std,
            last.pseudo_regret_std / (s.replications as f64).sqrt()
        );
    }
    let files = write_outputs(&cfg, &summaries, &out, RegretMode::Pseudo, &SeriesSelection::default())?;
    println!("wrote {} and plots", files.summary_csv.display());
    Ok(())
}
