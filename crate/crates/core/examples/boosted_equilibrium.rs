//! Pick any market-clearing allocation, synthesize pacing multipliers and
//! additive boosts that make it an equilibrium, then solve the boosted market
//! from scratch and land on the same utilities.

use autobid_market::equilibrium::{solve_submarket_boosted, verify_pacing, PacingOutcome, SolverOptions};
use autobid_market::incentives::synthesize_boosts;
use autobid_market::Matrix;

fn main() -> autobid_market::Result<()> {
    let values = Matrix::from_nested(&[[0.9, 0.2, 0.5], [0.3, 0.8, 0.4], [0.6, 0.5, 0.7]]);
    let budgets = [1.0, 0.8, 1.2];
    // Buyer 0 gets most of item 1 although buyer 1 values it far more.
    let target = Matrix::from_nested(&[[0.5, 0.7, 0.0], [0.5, 0.3, 0.0], [0.0, 0.0, 1.0]]);

    let (alphas, boosts) = synthesize_boosts(&values, &budgets, &target)?;
    println!("multipliers {alphas:.6?}");
    for (i, row) in boosts.to_rows().iter().enumerate() {
        println!("boosts of buyer {i}: {row:.6?}");
    }

    let claimed = PacingOutcome::from_parts(&values, Some(&boosts), alphas, target.clone());
    let report = verify_pacing(&claimed, &values, &budgets, Some(&boosts), 1e-9);
    println!("target certified: {} (max residual {:.1e})", report.pass, report.max_residual());

    let solved = solve_submarket_boosted(&values, &budgets, &boosts, &SolverOptions::default())?;
    for i in 0..budgets.len() {
        println!(
            "buyer {i}: target utility {:.9}, solved {:.9}",
            claimed.utilities[i], solved.utilities[i]
        );
    }
    Ok(())
}
