//! Two buyers with crossed values on two items. The second buyer's
//! equilibrium utility as a function of its budget has a closed form that is
//! flat on [1, 4], so utility is not concave in budget.

use autobid_market::equilibrium::{solve_submarket, SolverOptions};
use autobid_market::incentives::crossed_pair_utility;
use autobid_market::Matrix;

fn main() -> autobid_market::Result<()> {
    let values = Matrix::from_nested(&[[2.0, 1.0], [1.0, 2.0]]);
    println!("{:>6} {:>12} {:>12} {:>10}", "budget", "solved", "closed form", "|error|");
    for b in [0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 10.0] {
        let out = solve_submarket(&values, &[2.0, b], &SolverOptions::default())?;
        let exact = crossed_pair_utility(b);
        println!(
            "{b:>6} {:>12.9} {exact:>12.9} {:>10.1e}",
            out.utilities[1],
            (out.utilities[1] - exact).abs()
        );
    }
    Ok(())
}
