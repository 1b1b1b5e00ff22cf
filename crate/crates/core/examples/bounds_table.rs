//! Evaluates the deviation and regret bounds along `t`, with the round from
//! which the technical condition on `ε_t` holds.
//!
//! ```text
//! cargo run --example bounds_table -- [K] [delta]
//! ```

use pacbandit::bounds::{
    bound_at_optimal_lambda, check_technical_condition_eq5, eq5_threshold, lemma2_variance_bound,
    theorem2_bound, theorem3_terms,
};
use pacbandit::strategies::EpsilonSchedule;

fn main() -> pacbandit::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map_or(2, |s| s.parse().expect("K"));
    let delta: f64 = args.next().map_or(0.05, |s| s.parse().expect("delta"));
    let schedule = EpsilonSchedule::Theorem3;

    match eq5_threshold(k, delta, &schedule, 10_000_000) {
        Some(t) => println!("condition on eps_t holds from t = {t} (K = {k}, delta = {delta})"),
        None => println!("condition on eps_t fails up to 10^7"),
    }
    println!(
        "{:>9} {:>10} {:>6} {:>12} {:>12} {:>10} {:>10} {:>10} {:>10}",
        "t", "eps_t", "eq5", "dev bound", "opt-lambda", "smooth", "softmax", "conc", "regret"
    );
    let mut t = k as u64;
    while t <= 10_000_000 {
        let eps = schedule.value(t, k);
        let v = lemma2_variance_bound(t, eps);
        // Bound on t·|Δ − Δ̂| divided by t, at the worst-case variance.
        let pbb = bound_at_optimal_lambda((k as f64).ln(), t, delta, v)? / t as f64;
        let terms = theorem3_terms(t, k, delta);
        println!(
            "{:>9} {:>10.4e} {:>6} {:>12.4e} {:>12.4e} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            t,
            eps,
            check_technical_condition_eq5(t, k, delta, eps),
            theorem2_bound(t, k, delta, eps)?,
            pbb,
            terms.smoothing,
            terms.softmax,
            terms.concentration,
            terms.total()
        );
        t *= 10;
    }
    Ok(())
}
