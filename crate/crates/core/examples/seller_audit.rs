//! How much more revenue can a seller extract by choosing its own allocation
//! (implemented through boosts) while the other sellers keep theirs?

use autobid_market::equilibrium::{solve_market_ce, SolverOptions};
use autobid_market::generate::{generate, ValueDistribution};
use autobid_market::incentives::{default_epsilon, incentive_ratio, seller_best_response, BestResponseOptions};
use autobid_market::validate;

fn main() -> autobid_market::Result<()> {
    let market = validate(&generate(4, 3, 6, 2, ValueDistribution::LogNormal)?)?;
    for s in 0..market.num_sellers() {
        let r = incentive_ratio(&market, s, 1e-6)?;
        println!(
            "seller {s}: equilibrium revenue {:.6}, best deviation {:.6}, ratio {:.4} (bound {}), gap {:.1e}",
            r.ce_revenue, r.best_revenue, r.ratio, r.bound, r.gap
        );
    }

    // The best response itself, against what buyers get elsewhere.
    let ce = solve_market_ce(&market, &SolverOptions::default())?;
    let floor = default_epsilon(&market);
    let w: Vec<f64> = (0..market.num_buyers())
        .map(|i| (ce.utilities.row_sum(i) - ce.utilities[(i, 0)]).max(floor))
        .collect();
    let br = seller_best_response(&market, 0, &w, &BestResponseOptions::default())?;
    println!("\nseller 0 best response after {} iterations:", br.iterations);
    for (i, row) in br.allocation.to_rows().iter().enumerate() {
        println!("  buyer {i} receives {row:.4?}");
    }
    Ok(())
}
