use std::path::{Path, PathBuf};

use pacbandit::harness::{
    aggregate, load_csv, run_experiment, run_replication, write_outputs, CheckpointSchedule, ExperimentConfig,
    RegretMode, SeriesSelection, SUMMARY_COLUMNS,
};
use pacbandit::strategies::StrategySpec;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        name: "small".into(),
        horizon: 3_000,
        replications: 7,
        checkpoints: CheckpointSchedule { dense_until: 100, ratio: 1.1 },
        ..ExperimentConfig::exp1()
    }
}

#[test]
fn bundled_configs_match_presets() {
    for name in ["exp1", "exp2", "exp2-desk"] {
        let cfg = ExperimentConfig::load(&configs_dir().join(format!("{name}.conf"))).unwrap();
        assert_eq!(cfg, ExperimentConfig::preset(name).unwrap(), "{name}");
    }
    let spectrum = ExperimentConfig::load(&configs_dir().join("spectrum.conf")).unwrap();
    assert_eq!(spectrum.algorithms.len(), 5);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_worker_counts() {
    let cfg = small_config();
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, workers) in dirs.iter().zip([1, 1, 3]) {
        let summaries = run_experiment(&cfg, workers).unwrap();
        write_outputs(&cfg, &summaries, dir.path(), RegretMode::Pseudo, &SeriesSelection::default()).unwrap();
    }
    for file in ["summary.csv", "arms.csv", "config.txt", "regret.svg", "variance.svg"] {
        let bytes: Vec<Vec<u8>> = dirs.iter().map(|d| std::fs::read(d.path().join(file)).unwrap()).collect();
        assert!(!bytes[0].is_empty(), "{file}");
        assert_eq!(bytes[0], bytes[1], "{file} differs between identical runs");
        assert_eq!(bytes[0], bytes[2], "{file} differs between worker counts");
    }
}

#[test]
fn csv_roundtrip_and_schema() {
    let cfg = small_config();
    let summaries = run_experiment(&cfg, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_outputs(&cfg, &summaries, dir.path(), RegretMode::Expected, &SeriesSelection::default()).unwrap();

    let text = std::fs::read_to_string(&files.summary_csv).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header, SUMMARY_COLUMNS);
    let checkpoints = cfg.checkpoints.points(cfg.horizon).len();
    assert_eq!(text.lines().count(), 1 + 3 * checkpoints);

    let records = load_csv(&files.summary_csv).unwrap();
    let expected = pacbandit::harness::output::records(&summaries);
    assert_eq!(records.len(), expected.len());
    for (a, b) in records.iter().zip(&expected) {
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
    // The config copy regenerates the same run.
    let again = ExperimentConfig::load(&files.config).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn empty_algorithm_list_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    pacbandit::harness::emit_csv(&[], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().trim_end(), SUMMARY_COLUMNS.join(","));
    assert!(load_csv(&path).unwrap().is_empty());
}

#[test]
fn aggregation_ignores_replication_order() {
    let env = pacbandit::bandit::BernoulliBanditEnv::new(vec![0.5, 0.6]).unwrap();
    let spec = StrategySpec::exp3p1(0.001);
    let s = CheckpointSchedule { dense_until: 20, ratio: 1.5 };
    let mut runs: Vec<_> = (0..9).map(|i| run_replication(&env, &spec, 1500, &s, 4, i).unwrap()).collect();
    let a = aggregate(&runs, &spec, 0.05).unwrap();
    runs.rotate_left(4);
    runs.swap(0, 8);
    let b = aggregate(&runs, &spec, 0.05).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn regret_accountings_agree_within_monte_carlo_error() {
    let cfg = ExperimentConfig {
        replications: 200,
        horizon: 2_000,
        ..small_config()
    };
    for s in run_experiment(&cfg, 2).unwrap() {
        for row in &s.rows {
            let se = row.pseudo_regret_std / (s.replications as f64).sqrt();
            let diff = (row.pseudo_regret_mean - row.expected_regret_mean).abs();
            // The pseudo-regret std bounds the std of the difference of sums.
            assert!(diff <= 4.0 * se + 1e-9, "{} t={}: {diff} vs {se}", s.algorithm, row.checkpoint_t);
        }
    }
}

#[test]
fn missing_files_report_their_path() {
    let err = ExperimentConfig::load(Path::new("/nonexistent/exp.conf")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/exp.conf"));
    let err = load_csv(Path::new("/nonexistent/summary.csv")).unwrap_err();
    assert!(err.to_string().contains("summary.csv"));
}
