//! Command-line front end: `run`, `lab`, `bounds` and `plot`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::bounds::{bandit_reports, BoundParams};
use crate::error::{BanditError, Result};
use crate::lab::{run_lab, LabOptions};
use crate::strategies::{EpsilonSchedule, Exp3SpectrumParams};

use super::config::ExperimentConfig;
use super::experiment::{run_experiment, write_outputs, write_plots};
use super::output::{group_by_algorithm, load_csv};
use super::plot::{RegretMode, SeriesSelection};

#[derive(Debug, Parser)]
#[command(name = "pacbandit", version, about = "Importance-weighted bandit experiments and bounds")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a configuration, aggregate, and write CSV and plots.
    Run {
        /// Config file (same as --config).
        config_file: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in configuration: exp1, exp2 or exp2-desk.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory, overriding the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        /// Comma-separated algorithm labels to plot.
        #[arg(long)]
        series: Option<String>,
        #[arg(long, default_value = "pseudo")]
        regret_mode: String,
    },
    /// Run the lemma, MGF and coverage checks and write a report.
    Lab {
        #[arg(long, default_value = "out/lab")]
        out: PathBuf,
        /// Small sample sizes for a fast smoke run.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long, default_value_t = 2011)]
        seed: u64,
    },
    /// Print every bound at one round.
    Bounds {
        #[arg(long)]
        t: u64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Exploration floor; defaults to K^(-2/3) t^(-1/3).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Inverse temperature; defaults to K^(-1/3) t^(1/3) sqrt(ln K).
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Re-render the plots from a summary CSV.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        series: Option<String>,
        #[arg(long, default_value = "pseudo")]
        regret_mode: String,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn selection(series: &Option<String>) -> SeriesSelection {
    series.as_deref().map(SeriesSelection::parse).unwrap_or_default()
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    let w = |e: std::io::Error| BanditError::io("<stdout>", e);
    match command {
        Command::Run {
            config_file,
            config,
            preset,
            out: out_dir,
            workers,
            series,
            regret_mode,
        } => {
            let mode: RegretMode = regret_mode.parse()?;
            let cfg = match (config_file.or(config), preset) {
                (Some(_), Some(_)) => {
                    return Err(BanditError::param("give either a config file or --preset, not both"))
                }
                (Some(path), None) => ExperimentConfig::load(&path)?,
                (None, Some(name)) => ExperimentConfig::preset(&name)?,
                (None, None) => return Err(BanditError::param("run needs a config file or --preset")),
            };
            let dir = out_dir.unwrap_or_else(|| cfg.output_dir.clone());
            let summaries = run_experiment(&cfg, workers)?;
            let files = write_outputs(&cfg, &summaries, &dir, mode, &selection(&series))?;
            for s in &summaries {
                if let Some(last) = s.rows.last() {
                    writeln!(
                        out,
                        "{:<10} T={:<9} regret {:.3} ± {:.3}  subopt pulls {:.1}",
                        s.algorithm, last.checkpoint_t, last.pseudo_regret_mean, last.pseudo_regret_std, last.subopt_pulls_mean
                    )
                    .map_err(w)?;
                }
            }
            writeln!(out, "wrote {}", files.summary_csv.display()).map_err(w)?;
            writeln!(out, "wrote {}", files.regret_svg.display()).map_err(w)?;
            writeln!(out, "wrote {}", files.variance_svg.display()).map_err(w)?;
        }
        Command::Lab {
            out: dir,
            quick,
            workers,
            seed,
        } => {
            let opts = LabOptions {
                seed,
                ..if quick { LabOptions::quick() } else { LabOptions::default() }
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers.max(1))
                .build()
                .map_err(|e| BanditError::param(format!("thread pool: {e}")))?;
            let report = pool.install(|| run_lab(&opts))?;
            let (txt, csv) = report.write(&dir)?;
            write!(out, "{}", report.to_table()).map_err(w)?;
            writeln!(out, "wrote {}\nwrote {}", txt.display(), csv.display()).map_err(w)?;
            if !report.all_passed() {
                return Err(BanditError::param("some lab checks failed"));
            }
        }
        Command::Bounds {
            t,
            k,
            delta,
            epsilon,
            gamma,
        } => {
            let t3 = Exp3SpectrumParams::theorem3();
            let eps = epsilon.unwrap_or_else(|| EpsilonSchedule::Theorem3.value(t.max(1), k));
            let gamma = match gamma {
                Some(g) => g,
                None => t3.gamma_at(t, k)?,
            };
            let params = BoundParams::for_bandit(t, k, delta, eps, gamma)?;
            writeln!(
                out,
                "t={t} K={k} delta={delta} epsilon={eps:.6e} gamma={gamma:.6e} lambda={:.6e} C={:.6e}",
                params.lambda_t, params.c_t
            )
            .map_err(w)?;
            for r in bandit_reports(&params)? {
                let flags: Vec<String> = r.condition_flags.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(out, "{:<22} {:>14.6e}  {}", r.name, r.bound_value, flags.join(" ")).map_err(w)?;
            }
        }
        Command::Plot {
            csv,
            out: out_dir,
            series,
            regret_mode,
        } => {
            let mode: RegretMode = regret_mode.parse()?;
            let records = load_csv(&csv)?;
            let dir = out_dir.unwrap_or_else(|| csv.parent().map(PathBuf::from).unwrap_or_default());
            let (regret, variance) = write_plots(&group_by_algorithm(&records), &selection(&series), mode, &dir)?;
            writeln!(out, "wrote {}\nwrote {}", regret.display(), variance.display()).map_err(w)?;
        }
    }
    Ok(())
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn cli_main_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests succeed; a bare invocation prints
            // usage but still fails.
            let missing = e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand;
            if e.use_stderr() || missing {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// [`cli_main_with`] on the process arguments and standard streams.
pub fn cli_main() -> i32 {
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    cli_main_with(std::env::args_os(), &mut out, &mut err)
}
