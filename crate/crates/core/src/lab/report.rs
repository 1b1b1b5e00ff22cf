//! The full lab run and its text/CSV report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{BanditError, Result};

use super::coverage::{theorem1_coverage, theorem2_coverage, CoverageConfig, LambdaRule, Posterior};
use super::lemmas::{
    change_of_measure_suite, expsum_bound_check, expsum_suite, expsum_tightness_probe,
    smoothing_gap_suite, softmax_regret_suite,
};
use super::martingale::{mgf_check, MartingaleFamily, SyntheticMartingale};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabOptions {
    /// Randomized cases per deterministic suite.
    pub cases: u64,
    /// Monte Carlo samples per MGF configuration.
    pub mgf_samples: u64,
    /// Games per coverage experiment.
    pub coverage_runs: u64,
    pub coverage_horizon: u64,
    pub seed: u64,
}

impl Default for LabOptions {
    fn default() -> Self {
        LabOptions {
            cases: 100_000,
            mgf_samples: 1_000_000,
            coverage_runs: 1000,
            coverage_horizon: 10_000,
            seed: 2011,
        }
    }
}

impl LabOptions {
    /// A couple of seconds end to end.
    pub fn quick() -> Self {
        LabOptions {
            cases: 5_000,
            mgf_samples: 20_000,
            coverage_runs: 50,
            coverage_horizon: 2_000,
            seed: 2011,
        }
    }
}

/// One line of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct LabEntry {
    pub check: String,
    pub cases: u64,
    pub violations: u64,
    /// Observed quantity: worst margin, estimate or frequency.
    pub value: f64,
    /// What `value` is compared against.
    pub limit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabReport {
    pub entries: Vec<LabEntry>,
}

impl LabReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn to_table(&self) -> String {
        let width = self.entries.iter().map(|e| e.check.len()).max().unwrap_or(5).max(5);
        let mut s = format!(
            "{:<width$}  {:>9}  {:>10}  {:>13}  {:>13}  result\n",
            "check", "cases", "violations", "value", "limit"
        );
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{:<width$}  {:>9}  {:>10}  {:>13.6e}  {:>13.6e}  {}",
                e.check,
                e.cases,
                e.violations,
                e.value,
                e.limit,
                if e.passed { "pass" } else { "FAIL" }
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut run = || -> std::result::Result<(), csv::Error> {
            w.write_record(["check", "cases", "violations", "value", "limit", "passed"])?;
            for e in &self.entries {
                w.write_record([
                    e.check.clone(),
                    e.cases.to_string(),
                    e.violations.to_string(),
                    format!("{:.16e}", e.value),
                    format!("{:.16e}", e.limit),
                    e.passed.to_string(),
                ])?;
            }
            Ok(())
        };
        run().expect("writing to memory");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    /// Writes `lab_report.txt` and `lab_report.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| BanditError::io(dir, e))?;
        let txt = dir.join("lab_report.txt");
        let csv = dir.join("lab_report.csv");
        std::fs::write(&txt, self.to_table()).map_err(|e| BanditError::io(&txt, e))?;
        std::fs::write(&csv, self.to_csv()).map_err(|e| BanditError::io(&csv, e))?;
        Ok((txt, csv))
    }
}

/// Twenty `(martingale, λ)` pairs: four difference laws, each at
/// `λ ∈ {0, ¼, ½, ¾, 1}·1/C`.
pub fn mgf_configurations() -> Vec<(SyntheticMartingale, f64)> {
    let families = [
        (MartingaleFamily::Rademacher { c: 1.0 }, 100),
        (MartingaleFamily::CenteredBernoulli { c: 1.0, p: 0.1 }, 50),
        (MartingaleFamily::Uniform { c: 2.0 }, 40),
        (MartingaleFamily::HistoryDependent { c: 1.0, shrink: 0.25 }, 60),
    ];
    families
        .iter()
        .flat_map(|&(family, horizon)| {
            let m = SyntheticMartingale::new(family, horizon).expect("valid family");
            let c = m.range();
            [0.0, 0.25, 0.5, 0.75, 1.0].map(move |f| (m, f / c))
        })
        .collect()
}

pub fn run_lab(opts: &LabOptions) -> Result<LabReport> {
    let mut entries = Vec::new();
    for suite in [
        change_of_measure_suite(opts.cases, opts.seed)?,
        smoothing_gap_suite(opts.cases, opts.seed)?,
        softmax_regret_suite(opts.cases, opts.seed)?,
        expsum_suite(opts.cases, opts.seed)?,
    ] {
        entries.push(LabEntry {
            check: format!("{} (lhs - rhs)", suite.name),
            cases: suite.cases,
            violations: suite.violations,
            value: suite.worst_margin,
            limit: 0.0,
            passed: suite.passed(),
        });
    }

    let (lhs, bound) = expsum_bound_check(&[0.0, 1.0], 1.0)?;
    entries.push(LabEntry {
        check: "expsum n=2 x=[0,1] alpha=1".into(),
        cases: 1,
        violations: u64::from(lhs > bound),
        value: lhs,
        limit: bound,
        passed: lhs <= bound && (lhs - 0.2689414213699951).abs() < 1e-6,
    });

    let probe = expsum_tightness_probe();
    entries.push(LabEntry {
        check: "expsum n=3 maximizer |x2 - x3|".into(),
        cases: 1,
        violations: 0,
        value: (probe.x2 - probe.x3).abs(),
        limit: 1e-3,
        passed: (probe.x2 - probe.x3).abs() < 1e-3 && probe.value <= probe.bound,
    });

    for (i, (m, lambda)) in mgf_configurations().iter().enumerate() {
        let e = mgf_check(m, *lambda, opts.mgf_samples, opts.seed + i as u64)?;
        entries.push(LabEntry {
            check: format!("bernstein mgf #{i:02} {:?} lambda*C={:.2}", m.family, lambda * m.range()),
            cases: e.samples,
            violations: u64::from(!e.passes()),
            value: e.mean,
            limit: 1.0 + 3.0 * e.stderr,
            passed: e.passes(),
        });
    }

    for delta in [0.05, 0.5] {
        let cfg = CoverageConfig {
            base_seed: opts.seed,
            ..CoverageConfig::exp3(opts.coverage_horizon, opts.coverage_runs, delta)
        };
        let r = theorem1_coverage(&cfg, Posterior::NextPolicy, LambdaRule::Theorem2Capped)?;
        entries.push(LabEntry {
            check: format!("pac-bayes-bernstein coverage delta={delta}"),
            cases: r.runs,
            violations: r.violating_runs,
            value: r.frequency(),
            limit: delta,
            passed: r.consistent_with(delta),
        });
    }
    let cfg = CoverageConfig {
        base_seed: opts.seed,
        ..CoverageConfig::exp3(opts.coverage_horizon, opts.coverage_runs, 0.05)
    };
    let r = theorem2_coverage(&cfg)?;
    entries.push(LabEntry {
        check: "deviation bound coverage delta=0.05".into(),
        cases: r.runs,
        violations: r.violating_runs,
        value: r.frequency(),
        limit: 0.05,
        passed: r.frequency() <= 0.05,
    });
    Ok(LabReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_admissible_configurations() {
        let cfgs = mgf_configurations();
        assert_eq!(cfgs.len(), 20);
        assert!(cfgs.iter().all(|(m, l)| *l >= 0.0 && *l <= 1.0 / m.range()));
    }

    #[test]
    fn quick_lab_passes_and_reports() {
        let report = run_lab(&LabOptions::quick()).unwrap();
        assert!(report.all_passed(), "{}", report.to_table());
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), report.entries.len() + 1);
        let dir = tempfile::tempdir().unwrap();
        let (txt, _) = report.write(dir.path()).unwrap();
        assert!(std::fs::read_to_string(txt).unwrap().contains("pass"));
    }
}
