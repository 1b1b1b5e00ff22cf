//! Running a whole configuration: replications in parallel, aggregation in
//! stream order, then CSV and SVG output.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{BanditError, Result};

use super::aggregate::{Aggregator, AlgorithmSummary};
use super::config::ExperimentConfig;
use super::output::{emit_arm_csv, emit_csv, group_by_algorithm, records};
use super::plot::{emit_plot, Panel, RegretMode, SeriesSelection};
use super::runner::run_replication;

/// Runs every algorithm of `cfg` with `workers` threads. Output does not
/// depend on `workers`: replication `i` always uses stream `i`, and results
/// are merged in stream order.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<AlgorithmSummary>> {
    cfg.validate()?;
    let env = cfg.env()?;
    let workers = workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BanditError::param(format!("thread pool: {e}")))?;
    let checkpoints = cfg.checkpoints.points(cfg.horizon);
    // Bounded batches keep at most this many traces alive at once.
    let batch = (workers * 8) as u64;

    let mut summaries = Vec::with_capacity(cfg.algorithms.len());
    for spec in &cfg.algorithms {
        let mut agg = Aggregator::new(spec.label(), cfg.base_seed, env.biases().len(), checkpoints.clone())
            .with_measure(cfg.variance_measure);
        let mut start = 0;
        while start < cfg.replications {
            let end = (start + batch).min(cfg.replications);
            let traces: Vec<_> = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|stream| {
                        run_replication(&env, spec, cfg.horizon, &cfg.checkpoints, cfg.base_seed, stream)
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            for trace in &traces {
                agg.push(trace)?;
            }
            start = end;
        }
        summaries.push(agg.finish(spec, cfg.delta));
    }
    Ok(summaries)
}

/// Files written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub summary_csv: PathBuf,
    pub arms_csv: PathBuf,
    pub config: PathBuf,
    pub regret_svg: PathBuf,
    pub variance_svg: PathBuf,
}

/// Writes `summary.csv`, `arms.csv`, the resolved config and the two plot
/// panels into `dir`.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    summaries: &[AlgorithmSummary],
    dir: &Path,
    regret_mode: RegretMode,
    selection: &SeriesSelection,
) -> Result<OutputFiles> {
    std::fs::create_dir_all(dir).map_err(|e| BanditError::io(dir, e))?;
    let files = OutputFiles {
        summary_csv: dir.join("summary.csv"),
        arms_csv: dir.join("arms.csv"),
        config: dir.join("config.txt"),
        regret_svg: dir.join("regret.svg"),
        variance_svg: dir.join("variance.svg"),
    };
    emit_csv(summaries, &files.summary_csv)?;
    emit_arm_csv(summaries, &files.arms_csv)?;
    std::fs::write(&files.config, cfg.to_text()).map_err(|e| BanditError::io(&files.config, e))?;
    write_plots(&group_by_algorithm(&records(summaries)), selection, regret_mode, dir)?;
    Ok(files)
}

/// Renders both panels from already-grouped summary rows.
pub fn write_plots(
    groups: &[(String, Vec<super::aggregate::SummaryRow>)],
    selection: &SeriesSelection,
    regret_mode: RegretMode,
    dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| BanditError::io(dir, e))?;
    let regret = dir.join("regret.svg");
    let variance = dir.join("variance.svg");
    emit_plot(groups, selection, Panel::Regret(regret_mode), &regret)?;
    emit_plot(groups, selection, Panel::NormalizedVariance, &variance)?;
    Ok((regret, variance))
}
