//! Sellers compete by choosing allocations. Solve their game by cyclic best
//! response from several starts, certify the equilibrium and compare its Nash
//! social welfare with the competitive equilibrium.

use autobid_market::generate::{generate, ValueDistribution};
use autobid_market::report::pne_csv;
use autobid_market::seller_game::{audit_pne, PneOptions, PneStart};
use autobid_market::validate;

fn main() -> autobid_market::Result<()> {
    let market = validate(&generate(8, 3, 6, 3, ValueDistribution::Uniform01)?)?;
    let starts = [PneStart::Uniform, PneStart::Random(1), PneStart::Random(2), PneStart::Random(3)];
    let audit = audit_pne(&market, &PneOptions::default(), &starts, 1e-6)?;
    println!("converged in {} rounds", audit.solution.rounds);
    println!("starts agree within {:.1e} (limit {:.1e})", audit.spread, 10.0 * audit.tol);
    let f = &audit.fairness;
    println!("NSW ratio {:.6} in [{:.6}, 1]: {}", f.ratio, f.bound, f.pass);
    print!("\n{}", pne_csv(&market, &audit));
    Ok(())
}
