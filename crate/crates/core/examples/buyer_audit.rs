//! How much can one buyer gain by splitting its budget across sellers
//! differently from the proportional rule? Compares the equalized split with
//! a grid best response, everyone else fixed at the equilibrium.

use autobid_market::equilibrium::{solve_market_ce, SolverOptions};
use autobid_market::generate::{generate, ValueDistribution};
use autobid_market::incentives::buyer_deviation_report;
use autobid_market::report::{audit_csv, AuditRow};
use autobid_market::validate;

fn main() -> autobid_market::Result<()> {
    let market = validate(&generate(21, 3, 6, 3, ValueDistribution::Uniform01)?)?;
    let ce = solve_market_ce(&market, &SolverOptions::default())?;
    let mut rows = Vec::new();
    for b in 0..market.num_buyers() {
        let r = buyer_deviation_report(&market, b, &ce.split, 200, 1e-9)?;
        println!(
            "buyer {b}: equalized split {:.4?} -> best {:.4?}, gain x{:.4} (grid slack {:.1e})",
            r.equalized.split, r.best_split, r.ratio, r.slack
        );
        rows.push(AuditRow::from(&r));
    }
    print!("\n{}", audit_csv(&rows));
    Ok(())
}
