use pacbandit::bandit::{ArmDistribution, BernoulliBanditEnv};
use pacbandit::bounds::{
    bound_at_optimal_lambda, complexity, kl_divergence, optimal_lambda, pac_bayes_bernstein_bound, theorem2_bound,
    E_MINUS_2,
};
use pacbandit::harness::{run_replication, CheckpointSchedule};
use pacbandit::lab::{change_of_measure_check, expsum_bound_check, smoothing_gap_check};
use pacbandit::strategies::{EpsilonSchedule, Exp3SpectrumParams, GammaSchedule, StrategySpec};
use proptest::prelude::*;

fn distribution(k: usize) -> impl Strategy<Value = ArmDistribution> {
    prop::collection::vec(1e-6..1.0f64, k).prop_map(|w| {
        let s: f64 = w.iter().sum();
        let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
        let total: f64 = p.iter().sum();
        p[0] += 1.0 - total;
        ArmDistribution::new(p).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn variance_bound_holds_on_random_games(
        biases in prop::collection::vec(0.0..=1.0f64, 2..6),
        gamma_exp in 0.0..1.5f64,
        seed in 0u64..1000,
    ) {
        let env = BernoulliBanditEnv::new(biases).unwrap();
        let spec = StrategySpec::Exp3 {
            label: "p".into(),
            params: Exp3SpectrumParams {
                epsilon: EpsilonSchedule::Experiment,
                gamma: GammaSchedule::Power { scale: 1.0, k_exp: 0.0, t_exp: gamma_exp },
            },
        };
        let trace = run_replication(&env, &spec, 1500, &CheckpointSchedule { dense_until: 1500, ratio: 2.0 }, seed, 0).unwrap();
        for row in &trace.rows {
            prop_assert_eq!(row.lemma2_violations, 0);
            prop_assert!(row.min_mass_seen >= row.floor * (1.0 - 1e-12));
            if !row.softmax_regret_bound.is_nan() {
                prop_assert!(row.softmax_empirical_regret <= row.softmax_regret_bound);
            }
        }
    }

    #[test]
    fn closed_form_at_optimal_lambda(
        kl in 0.0..5.0f64,
        t in 1u64..10_000_000,
        delta in 1e-6..0.99f64,
        v in 1e-3..1e9f64,
    ) {
        let lambda = optimal_lambda(kl, t, delta, v).unwrap();
        let at = pac_bayes_bernstein_bound(kl, t, delta, lambda, v).unwrap();
        let closed = 2.0 * (E_MINUS_2 * v * complexity(kl, t, delta)).sqrt();
        prop_assert!((at - closed).abs() <= 1e-9 * closed);
        prop_assert!((bound_at_optimal_lambda(kl, t, delta, v).unwrap() - closed).abs() <= 1e-9 * closed);
        // The minimizer beats nearby choices.
        for f in [0.5, 0.9, 1.1, 2.0] {
            prop_assert!(pac_bayes_bernstein_bound(kl, t, delta, lambda * f, v).unwrap() >= at * (1.0 - 1e-12));
        }
    }

    #[test]
    fn deviation_bound_scaling(t in 2u64..1_000_000, eps_frac in 0.01..0.25f64) {
        let b = theorem2_bound(t, 2, 0.05, eps_frac).unwrap();
        let b2 = theorem2_bound(t, 2, 0.05, 2.0 * eps_frac).unwrap();
        prop_assert!((b / b2 - 2f64.sqrt()).abs() < 1e-12);
        prop_assert!(theorem2_bound(t, 2, 0.5, eps_frac).unwrap() < b);
    }

    #[test]
    fn kl_against_uniform_at_most_ln_k(rho in (2usize..12).prop_flat_map(distribution)) {
        let k = rho.num_arms();
        let kl = kl_divergence(&rho, &ArmDistribution::uniform(k).unwrap()).unwrap();
        prop_assert!(kl >= 0.0 && kl <= (k as f64).ln() + 1e-12);
    }

    #[test]
    fn change_of_measure_never_fails(
        (rho, mu, phi) in (2usize..16).prop_flat_map(|k| (distribution(k), distribution(k), prop::collection::vec(-30.0..30.0f64, k)))
    ) {
        let (lhs, rhs) = change_of_measure_check(&phi, &rho, &mu).unwrap();
        prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn smoothing_gap_at_most_k_eps(
        (rho, biases) in (2usize..10).prop_flat_map(|k| (distribution(k), prop::collection::vec(0.0..=1.0f64, k))),
        frac in 0.0..=1.0f64,
    ) {
        let k = rho.num_arms();
        let env = BernoulliBanditEnv::new(biases).unwrap();
        let (gap, bound) = smoothing_gap_check(&rho, frac / k as f64, &env).unwrap();
        prop_assert!(gap <= bound + 1e-12);
    }

    #[test]
    fn expsum_at_most_ln_n_over_alpha(
        tail in prop::collection::vec(-50.0..50.0f64, 1..31),
        alpha in 1e-3..1e3f64,
    ) {
        let mut x = vec![0.0];
        x.extend(tail);
        let (lhs, bound) = expsum_bound_check(&x, alpha).unwrap();
        prop_assert!(lhs <= bound * (1.0 + 1e-12));
    }
}
