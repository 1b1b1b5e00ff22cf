//! Mean/std curves across replications.

use crate::bounds::{check_technical_condition_eq5, theorem2_bound, theorem3_regret_bound};
use crate::error::{BanditError, Result};
use crate::strategies::StrategySpec;

use super::runner::{CheckpointRow, RunTrace};

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample std; 0 for fewer than two samples.
    pub fn std(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0).sqrt()
        }
    }
}

/// Which per-arm variance feeds the normalized variance columns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum VarianceMeasure {
    /// `Σ_τ 1/π_τ(a) + 1/π_τ(a*)`, including `a*`.
    #[default]
    Bound,
    /// The exact conditional variance; zero on `a*`.
    Exact,
}

impl VarianceMeasure {
    pub fn as_str(&self) -> &'static str {
        match self {
            VarianceMeasure::Bound => "bound",
            VarianceMeasure::Exact => "exact",
        }
    }
}

impl std::str::FromStr for VarianceMeasure {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bound" => Ok(VarianceMeasure::Bound),
            "exact" => Ok(VarianceMeasure::Exact),
            other => Err(BanditError::param(format!(
                "unknown variance measure '{other}' (expected bound or exact)"
            ))),
        }
    }
}

/// One row of the summary CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub checkpoint_t: u64,
    pub pseudo_regret_mean: f64,
    pub pseudo_regret_std: f64,
    pub expected_regret_mean: f64,
    pub expected_regret_std: f64,
    /// `V_t(ρ_t) / (2Kt)`, `NaN` where the variance is undefined.
    pub norm_variance_mean: f64,
    pub norm_variance_std: f64,
    pub subopt_pulls_mean: f64,
    pub theorem2_bound: f64,
    pub theorem3_bound: f64,
    pub eq5_satisfied: bool,
}

/// Summary of one algorithm's replications.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub replications: u64,
    pub seed: u64,
    pub num_arms: usize,
    pub rows: Vec<SummaryRow>,
    /// Mean per-arm `V_t(a) / (2Kt)`, flat as `row * K + arm`.
    pub arm_norm_variance_mean: Vec<f64>,
    /// Mean per-arm next-round policy, same layout.
    pub arm_policy_mean: Vec<f64>,
    /// Checkpoints in any run where some `V_t(a) > 2t/ε_t`.
    pub lemma2_violations: u64,
    /// Checkpoints in any run where `Δ̂_t(ρ_t^exp) > ln K / γ_t`.
    pub lemma7_violations: u64,
}

impl AlgorithmSummary {
    /// Standard deviations are a placeholder 0 when only one run exists.
    pub fn std_is_degenerate(&self) -> bool {
        self.replications < 2
    }

    pub fn row_at(&self, t: u64) -> Option<&SummaryRow> {
        self.rows
            .binary_search_by_key(&t, |r| r.checkpoint_t)
            .ok()
            .map(|i| &self.rows[i])
    }

    pub fn arm_norm_variance_at(&self, index: usize) -> &[f64] {
        &self.arm_norm_variance_mean[index * self.num_arms..(index + 1) * self.num_arms]
    }

    pub fn arm_policy_at(&self, index: usize) -> &[f64] {
        &self.arm_policy_mean[index * self.num_arms..(index + 1) * self.num_arms]
    }
}

/// Per-checkpoint accumulators for one algorithm. Results depend on the
/// order of [`Aggregator::push`] calls only through float rounding, so the
/// harness always pushes in stream order.
#[derive(Debug, Clone)]
pub struct Aggregator {
    algorithm: String,
    seed: u64,
    num_arms: usize,
    measure: VarianceMeasure,
    checkpoints: Vec<u64>,
    pseudo: Vec<Welford>,
    expected: Vec<Welford>,
    variance: Vec<Welford>,
    subopt: Vec<Welford>,
    arm_variance: Vec<Welford>,
    arm_policy: Vec<Welford>,
    lemma2_violations: u64,
    lemma7_violations: u64,
}

impl Aggregator {
    pub fn new(algorithm: impl Into<String>, seed: u64, num_arms: usize, checkpoints: Vec<u64>) -> Self {
        let n = checkpoints.len();
        Aggregator {
            algorithm: algorithm.into(),
            seed,
            num_arms,
            measure: VarianceMeasure::default(),
            checkpoints,
            pseudo: vec![Welford::default(); n],
            expected: vec![Welford::default(); n],
            variance: vec![Welford::default(); n],
            subopt: vec![Welford::default(); n],
            arm_variance: vec![Welford::default(); n * num_arms],
            arm_policy: vec![Welford::default(); n * num_arms],
            lemma2_violations: 0,
            lemma7_violations: 0,
        }
    }

    pub fn with_measure(mut self, measure: VarianceMeasure) -> Self {
        self.measure = measure;
        self
    }

    pub fn replications(&self) -> u64 {
        self.pseudo.first().map_or(0, Welford::count)
    }

    pub fn push(&mut self, run: &RunTrace) -> Result<()> {
        if run.algorithm != self.algorithm {
            return Err(BanditError::MismatchedSchedules(format!(
                "run of '{}' pushed into '{}'",
                run.algorithm, self.algorithm
            )));
        }
        if run.num_arms != self.num_arms || !run.checkpoints().eq(self.checkpoints.iter().copied()) {
            return Err(BanditError::MismatchedSchedules(format!(
                "stream {} of '{}'",
                run.stream_id, run.algorithm
            )));
        }
        let k = self.num_arms;
        let (played, arms): (fn(&CheckpointRow) -> f64, &[f64]) = match self.measure {
            VarianceMeasure::Bound => (|r| r.variance_played_relaxed, &run.arm_relaxed_variance),
            VarianceMeasure::Exact => (|r| r.variance_played, &run.arm_variance),
        };
        for (i, row) in run.rows.iter().enumerate() {
            let scale = 2.0 * k as f64 * row.t as f64;
            self.pseudo[i].push(row.pseudo_regret);
            self.expected[i].push(row.expected_regret);
            self.variance[i].push(played(row) / scale);
            self.subopt[i].push(row.subopt_pulls as f64);
            for a in 0..k {
                self.arm_variance[i * k + a].push(arms[i * k + a] / scale);
                self.arm_policy[i * k + a].push(run.arm_policy[i * k + a]);
            }
            if row.lemma2_violations > 0 {
                self.lemma2_violations += 1;
            }
            if row.softmax_empirical_regret > row.softmax_regret_bound {
                self.lemma7_violations += 1;
            }
        }
        Ok(())
    }

    /// Closes the summary and fills the bound columns from `spec`'s
    /// exploration floor.
    pub fn finish(self, spec: &StrategySpec, delta: f64) -> AlgorithmSummary {
        let k = self.num_arms;
        let rows = self
            .checkpoints
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let floor = spec.exploration_floor(k, t);
                let (theorem2, eq5) = match floor {
                    Some(eps) => (
                        theorem2_bound(t, k, delta, eps).unwrap_or(f64::NAN),
                        check_technical_condition_eq5(t, k, delta, eps),
                    ),
                    None => (f64::NAN, false),
                };
                SummaryRow {
                    checkpoint_t: t,
                    pseudo_regret_mean: self.pseudo[i].mean(),
                    pseudo_regret_std: self.pseudo[i].std(),
                    expected_regret_mean: self.expected[i].mean(),
                    expected_regret_std: self.expected[i].std(),
                    norm_variance_mean: self.variance[i].mean(),
                    norm_variance_std: nan_aware_std(&self.variance[i]),
                    subopt_pulls_mean: self.subopt[i].mean(),
                    theorem2_bound: theorem2,
                    theorem3_bound: theorem3_regret_bound(t, k, delta),
                    eq5_satisfied: eq5,
                }
            })
            .collect();
        AlgorithmSummary {
            replications: self.replications(),
            algorithm: self.algorithm,
            seed: self.seed,
            num_arms: k,
            rows,
            arm_norm_variance_mean: self.arm_variance.iter().map(Welford::mean).collect(),
            arm_policy_mean: self.arm_policy.iter().map(Welford::mean).collect(),
            lemma2_violations: self.lemma2_violations,
            lemma7_violations: self.lemma7_violations,
        }
    }
}

// A NaN series stays NaN in both columns instead of reporting std 0.
fn nan_aware_std(w: &Welford) -> f64 {
    if w.mean().is_nan() {
        f64::NAN
    } else {
        w.std()
    }
}

/// Aggregates a finished batch of runs, ordering them by `stream_id` first
/// so the result does not depend on the order they are given in.
pub fn aggregate(runs: &[RunTrace], spec: &StrategySpec, delta: f64) -> Result<AlgorithmSummary> {
    aggregate_with(runs, spec, delta, VarianceMeasure::default())
}

pub fn aggregate_with(
    runs: &[RunTrace],
    spec: &StrategySpec,
    delta: f64,
    measure: VarianceMeasure,
) -> Result<AlgorithmSummary> {
    let mut sorted: Vec<&RunTrace> = runs.iter().collect();
    sorted.sort_by_key(|r| r.stream_id);
    let first = sorted.first().ok_or(BanditError::EmptyHistory)?;
    let mut agg = Aggregator::new(
        first.algorithm.clone(),
        first.seed,
        first.num_arms,
        first.checkpoints().collect(),
    )
    .with_measure(measure);
    for run in sorted {
        agg.push(run)?;
    }
    Ok(agg.finish(spec, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::BernoulliBanditEnv;
    use crate::harness::runner::run_replication;
    use crate::harness::schedule::CheckpointSchedule;

    #[test]
    fn welford_hand_values() {
        let mut w = Welford::default();
        w.push(1.0);
        assert_eq!(w.std(), 0.0);
        w.push(3.0);
        assert_eq!(w.mean(), 2.0);
        assert!((w.std() - 2f64.sqrt()).abs() < 1e-15);
        let mut c = Welford::default();
        (0..10).for_each(|_| c.push(0.25));
        assert_eq!(c.std(), 0.0);
    }

    fn runs(spec: &StrategySpec, n: u64) -> Vec<RunTrace> {
        let env = BernoulliBanditEnv::new(vec![0.5, 0.6]).unwrap();
        let s = CheckpointSchedule { dense_until: 50, ratio: 1.3 };
        (0..n)
            .map(|i| run_replication(&env, spec, 2000, &s, 5, i).unwrap())
            .collect()
    }

    #[test]
    fn order_independent() {
        let spec = StrategySpec::exp3();
        let mut r = runs(&spec, 6);
        let a = aggregate(&r, &spec, 0.05).unwrap();
        r.reverse();
        r.swap(1, 3);
        let b = aggregate(&r, &spec, 0.05).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert_eq!(a.replications, 6);
        assert_eq!(a.lemma2_violations, 0);
        assert_eq!(a.lemma7_violations, 0);
    }

    #[test]
    fn measures_differ_only_in_variance() {
        let spec = StrategySpec::exp3();
        let r = runs(&spec, 3);
        let bound = aggregate_with(&r, &spec, 0.05, VarianceMeasure::Bound).unwrap();
        let exact = aggregate_with(&r, &spec, 0.05, VarianceMeasure::Exact).unwrap();
        for (b, e) in bound.rows.iter().zip(&exact.rows) {
            assert_eq!(b.pseudo_regret_mean, e.pseudo_regret_mean);
            assert!(b.norm_variance_mean > e.norm_variance_mean);
            // Both stay under the 2t/ε_t ceiling, i.e. 1/(Kε_t) after normalization.
            assert!(b.norm_variance_mean <= 1.0 / (2.0 * spec.exploration_floor(2, b.checkpoint_t).unwrap()));
        }
        assert_eq!("exact".parse::<VarianceMeasure>().unwrap(), VarianceMeasure::Exact);
        assert!("loose".parse::<VarianceMeasure>().is_err());
    }

    #[test]
    fn single_run_is_flagged() {
        let spec = StrategySpec::ucb1();
        let a = aggregate(&runs(&spec, 1), &spec, 0.05).unwrap();
        assert!(a.std_is_degenerate());
        assert!(a.rows.iter().all(|r| r.pseudo_regret_std == 0.0));
        assert!(a.rows.iter().all(|r| r.norm_variance_mean.is_nan()));
    }

    #[test]
    fn mismatched_schedules_rejected() {
        let spec = StrategySpec::exp3();
        let env = BernoulliBanditEnv::new(vec![0.5, 0.6]).unwrap();
        let mut r = runs(&spec, 2);
        r.push(run_replication(&env, &spec, 1000, &CheckpointSchedule::default(), 5, 9).unwrap());
        assert!(matches!(
            aggregate(&r, &spec, 0.05),
            Err(BanditError::MismatchedSchedules(_))
        ));
        assert!(aggregate(&[], &spec, 0.05).is_err());
    }
}
