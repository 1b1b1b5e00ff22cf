//! Numerical checks of the concentration machinery: Bernstein's MGF
//! inequality on synthetic martingales, the deterministic lemma
//! inequalities, and coverage of the high-probability bounds.

pub mod coverage;
pub mod lemmas;
pub mod martingale;
pub mod report;

pub use coverage::{theorem1_coverage, theorem2_coverage, CoverageConfig, CoverageResult, LambdaRule, Posterior};
pub use lemmas::{
    change_of_measure_check, exp3_empirical_regret_check, expsum_bound_check, expsum_tightness_probe,
    smoothing_gap_check, SuiteResult, TightnessProbe,
};
pub use martingale::{mgf_check, MartingaleFamily, MgfEstimate, SyntheticMartingale};
pub use report::{mgf_configurations, run_lab, LabEntry, LabOptions, LabReport};
