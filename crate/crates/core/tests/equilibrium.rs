//! Solver behaviour on small hand-built markets, including the degenerate
//! budgets that arise inside the dynamics.

use approx::assert_relative_eq;
use autobid_market::equilibrium::{
    solve_market_ce, solve_submarket, solve_submarket_boosted, verify_pacing, SolverOptions, SubmarketSolver,
};
use autobid_market::incentives::{buyer_equalized_split, crossed_pair_utility};
use autobid_market::seller_game::{audit_pne, PneOptions, PneStart};
use autobid_market::{validate, BudgetSplit, Matrix, MarketSpec};

fn crossed_pair() -> MarketSpec {
    MarketSpec::new(vec![2.0, 1.0], vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![0, 1])
}

#[test]
fn crossed_pair_equilibrium_gives_each_buyer_its_favourite() {
    let market = validate(&crossed_pair()).unwrap();
    let eq = solve_market_ce(&market, &SolverOptions::default()).unwrap();
    assert_relative_eq!(eq.prices()[0], 2.0, epsilon = 1e-8);
    assert_relative_eq!(eq.prices()[1], 1.0, epsilon = 1e-8);
    assert_relative_eq!(eq.allocation()[(0, 0)], 1.0, epsilon = 1e-8);
    assert_relative_eq!(eq.allocation()[(1, 1)], 1.0, epsilon = 1e-8);
    let u = eq.totals();
    assert_relative_eq!(u[0], 2.0, epsilon = 1e-8);
    assert_relative_eq!(u[1], 2.0, epsilon = 1e-8);
}

#[test]
fn crossed_pair_buyer_utility_has_closed_form_at_the_equilibrium_budget() {
    assert_relative_eq!(crossed_pair_utility(2.0), 2.0, epsilon = 1e-12);
}

#[test]
fn zero_boosts_reproduce_the_plain_solver() {
    let values = Matrix::from_nested(&[[0.9, 0.2, 0.4], [0.1, 0.8, 0.5], [0.3, 0.3, 0.7]]);
    let budgets = [1.0, 0.6, 0.3];
    let opts = SolverOptions::default();
    let plain = solve_submarket(&values, &budgets, &opts).unwrap();
    let boosted = solve_submarket_boosted(&values, &budgets, &Matrix::zeros(3, 3), &opts).unwrap();
    for j in 0..3 {
        assert_relative_eq!(plain.prices[j], boosted.prices[j], max_relative = 1e-7);
    }
    for i in 0..3 {
        assert_relative_eq!(plain.utilities[i], boosted.utilities[i], max_relative = 1e-7);
    }
    assert!(verify_pacing(&boosted, &values, &budgets, None, 1e-8).pass);
}

#[test]
fn dust_buyer_in_a_boosted_submarket_still_verifies() {
    let values = Matrix::from_nested(&[[0.0399, 0.0], [0.4336, 0.2966]]);
    let boosts = Matrix::from_nested(&[[0.2475, 0.3547], [0.4917, 0.1836]]);
    let budgets = [1e-28, 0.42123632204356704];
    let out = solve_submarket_boosted(&values, &budgets, &boosts, &SolverOptions::default()).unwrap();
    let report = verify_pacing(&out, &values, &budgets, Some(&boosts), 1e-8);
    assert!(report.pass, "{report:?}");
    assert!(out.spend[0] <= 1e-27);
    assert_relative_eq!(out.spend[1], budgets[1], max_relative = 1e-8);
}

#[test]
fn zero_budget_keeps_its_boost_in_the_seller_solver() {
    let spec = MarketSpec::new(
        vec![0.5, 0.42],
        vec![vec![0.0399, 0.0], vec![0.4336, 0.2966]],
        vec![0, 0],
    )
    .with_boosts(vec![vec![0.2475, 0.3547], vec![0.4917, 0.1836]]);
    let market = validate(&spec).unwrap();
    let boosts = market.boosts().cloned().unwrap();
    let mut solver = SubmarketSolver::new(&market, Some(&boosts), SolverOptions::default());
    let out = solver.solve(0, &[0.0, 0.42]).unwrap();
    // Buyer 0 has no money, yet its boost on item 1 still floors that price.
    assert!(out.prices[1] >= 0.3547 - 1e-12, "{:?}", out.prices);
    assert_relative_eq!(out.spend[1], 0.42, max_relative = 1e-8);
    assert!(out.spend[0].abs() <= 1e-12);
}

#[test]
fn equalized_split_handles_a_seller_that_absorbs_everything() {
    let spec = MarketSpec::new(
        vec![1.0, 1.0],
        vec![vec![1.0, 1e-3], vec![1.0, 0.0]],
        vec![0, 1],
    );
    let market = validate(&spec).unwrap();
    let others = BudgetSplit(Matrix::from_nested(&[[0.5, 0.5], [1.0, 0.0]]));
    let eq = buyer_equalized_split(&market, 0, &others, 1e-9).unwrap();
    assert_relative_eq!(eq.split.iter().sum::<f64>(), 1.0, max_relative = 1e-12);
    assert!(eq.split.iter().all(|&b| b >= 0.0));
    // Against a rival of budget 1 on item 0, a second unit of money there is
    // worth much more than item 1's tiny value.
    assert!(eq.split[0] > eq.split[1]);
}

#[test]
fn seller_game_equilibrium_is_unique_and_fair() {
    let spec = MarketSpec::new(
        vec![1.0, 0.7, 0.4],
        vec![
            vec![0.9, 0.2, 0.6, 0.3],
            vec![0.4, 0.8, 0.3, 0.7],
            vec![0.5, 0.5, 0.9, 0.1],
        ],
        vec![0, 0, 1, 1],
    );
    let market = validate(&spec).unwrap();
    let starts = [PneStart::Uniform, PneStart::Random(1), PneStart::Random(2)];
    let audit = audit_pne(&market, &PneOptions::default(), &starts, 1e-6).unwrap();
    assert!(audit.unique(), "restart spread {}", audit.spread);
    assert!(audit.pass(), "{:?}", audit.fairness);
    assert!(audit.fairness.ratio >= audit.fairness.bound - 1e-6);
}
