//! Randomized properties of generation, file IO, the solvers and the dynamics.

use std::path::Path;

use autobid_market::dynamics::{self, DynamicsConfig};
use autobid_market::equilibrium::{
    solve_submarket, solve_submarket_boosted, verify_pacing, PacingOutcome, SolverOptions,
};
use autobid_market::generate::{generate, ValueDistribution};
use autobid_market::incentives::synthesize_boosts;
use autobid_market::{io, validate, Matrix};
use proptest::prelude::*;

fn dist() -> impl Strategy<Value = ValueDistribution> {
    prop_oneof![
        Just(ValueDistribution::Uniform01),
        Just(ValueDistribution::LogNormal),
        (0.1..0.6f64).prop_map(ValueDistribution::Sparse),
    ]
}

fn submarket() -> impl Strategy<Value = (Matrix, Vec<f64>)> {
    (1..=4usize, 1..=4usize).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(0.05..1.0f64, m), n),
            prop::collection::vec(0.2..2.0f64, n),
        )
            .prop_map(|(rows, budgets)| (Matrix::from_rows(rows).unwrap(), budgets))
    })
}

/// A column-stochastic target in which every buyer receives something.
fn target(n: usize, m: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, n), m).prop_filter_map(
        "every buyer and item needs positive mass",
        move |cols| {
            let mut x = Matrix::zeros(n, m);
            for (j, col) in cols.iter().enumerate() {
                let s: f64 = col.iter().sum();
                if s <= 1e-3 {
                    return None;
                }
                for i in 0..n {
                    x[(i, j)] = col[i] / s;
                }
            }
            (0..n).all(|i| x.row_sum(i) > 1e-3).then_some(x)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_markets_validate(seed in any::<u64>(), n in 1..6usize, k in 1..4usize, extra in 0..4usize, d in dist()) {
        let spec = generate(seed, n, k + extra, k, d).unwrap();
        let market = validate(&spec).unwrap();
        prop_assert_eq!(market.num_sellers(), k);
        prop_assert!((0..k).all(|s| !market.items_of(s).is_empty()));
        prop_assert_eq!(generate(seed, n, k + extra, k, d).unwrap(), spec);
    }

    #[test]
    fn json_round_trips_exactly(seed in any::<u64>(), d in dist()) {
        let spec = generate(seed, 3, 5, 2, d).unwrap();
        let back = io::from_json(&io::to_json(&spec), Path::new("mem")).unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn submarket_solution_verifies((values, budgets) in submarket()) {
        let out = solve_submarket(&values, &budgets, &SolverOptions::default()).unwrap();
        let report = verify_pacing(&out, &values, &budgets, None, 1e-8);
        prop_assert!(report.pass, "{:?}", report);
    }

    #[test]
    fn more_budget_never_hurts((values, budgets) in submarket(), buyer in 0..4usize, raise in 0.01..1.0f64) {
        let buyer = buyer % budgets.len();
        let opts = SolverOptions::default();
        let before = solve_submarket(&values, &budgets, &opts).unwrap().utilities[buyer];
        let mut richer = budgets.clone();
        richer[buyer] += raise;
        let after = solve_submarket(&values, &richer, &opts).unwrap().utilities[buyer];
        prop_assert!(after >= before - 1e-8 * before.max(1.0), "{} -> {}", before, after);
    }

    #[test]
    fn synthesized_boosts_certify_their_target(((values, budgets), x) in submarket().prop_flat_map(|(v, b)| {
        let (n, m) = v.shape();
        (Just((v, b)), target(n, m))
    })) {
        let (alphas, boosts) = synthesize_boosts(&values, &budgets, &x).unwrap();
        prop_assert!(boosts.as_slice().iter().all(|&c| c >= 0.0));
        let claimed = PacingOutcome::from_parts(&values, Some(&boosts), alphas, x);
        prop_assert!(verify_pacing(&claimed, &values, &budgets, Some(&boosts), 1e-6).pass);
        let solved = solve_submarket_boosted(&values, &budgets, &boosts, &SolverOptions::default()).unwrap();
        for (a, b) in solved.utilities.iter().zip(&claimed.utilities) {
            prop_assert!((a - b).abs() <= 1e-7 * b.max(1.0), "{} vs {}", a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn potential_never_rises(seed in any::<u64>(), n in 2..5usize, k in 2..4usize) {
        let spec = generate(seed, n, 2 * k, k, ValueDistribution::Uniform01).unwrap();
        let market = validate(&spec).unwrap();
        let config = DynamicsConfig { rounds: 30, ..DynamicsConfig::default() };
        let trace = dynamics::run(&market, &config).unwrap();
        prop_assert!(trace.max_phi_increase() <= 1e-8, "{}", trace.max_phi_increase());
    }
}
