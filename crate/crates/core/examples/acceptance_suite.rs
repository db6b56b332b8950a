//! Run the full battery of checks over a few seeds and print the summary
//! table. Pass a range such as `1..50` to widen it.

use autobid_market::suite::{parse_seed_range, run_suite};

fn main() -> autobid_market::Result<()> {
    let range = std::env::args().nth(1).unwrap_or_else(|| "1..5".into());
    let report = run_suite(&parse_seed_range(&range)?);
    print!("{}", report.table());
    println!("{}", if report.pass() { "all checks pass" } else { "some checks FAIL" });
    Ok(())
}
