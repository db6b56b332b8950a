//! Solve a market-wide competitive equilibrium, split it by seller, verify it
//! and compare its Eisenberg-Gale objective with an exhaustive grid search.

use autobid_market::equilibrium::{
    eg_objective, grid_discretization_bound, grid_search_eg, solve_market_ce, SolverOptions,
};
use autobid_market::generate::{generate, ValueDistribution};
use autobid_market::report::EquilibriumReport;
use autobid_market::validate;

fn main() -> autobid_market::Result<()> {
    let market = validate(&generate(3, 3, 5, 2, ValueDistribution::Uniform01)?)?;
    let opts = SolverOptions::default();
    let ce = solve_market_ce(&market, &opts)?;
    let report = EquilibriumReport::new(&market, &ce, None, opts.tol);
    print!("{}", report.summary());

    println!("\nbudget split by seller:");
    for (i, row) in report.budget_split.iter().enumerate() {
        println!("  buyer {i}: {row:.6?}");
    }
    println!("largest share of a budget paid to one seller: {:.6}", ce.max_budget_share(market.budgets()));

    let small = validate(&generate(5, 2, 3, 2, ValueDistribution::Uniform01)?)?;
    let ce = solve_market_ce(&small, &opts)?;
    let solved = eg_objective(small.budgets(), &ce.totals())?;
    let grid = grid_search_eg(&small, 30)?;
    let slack = grid_discretization_bound(&small, &ce.totals(), 30);
    println!(
        "\nEG objective: solver {solved:.9}, grid {:.9}, gap {:.2e} within bound {slack:.2e}",
        grid.objective,
        solved - grid.objective
    );
    Ok(())
}
