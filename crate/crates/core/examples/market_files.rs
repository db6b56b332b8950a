//! Generate a seeded market, write it to disk, read it back bit-for-bit and
//! see what validation rejects.

use autobid_market::generate::{generate, ValueDistribution};
use autobid_market::{io, validate, MarketSpec};

fn main() -> autobid_market::Result<()> {
    let spec = generate(7, 3, 5, 2, ValueDistribution::LogNormal)?;
    let market = validate(&spec)?;
    println!(
        "{} buyers, {} items, {} sellers, total budget {:.4}",
        market.num_buyers(),
        market.num_items(),
        market.num_sellers(),
        market.total_budget()
    );
    for s in 0..market.num_sellers() {
        println!("seller {s} owns items {:?}", market.items_of(s));
    }

    let dir = std::env::temp_dir().join("autobid-market-files");
    std::fs::create_dir_all(&dir).map_err(|source| autobid_market::Error::Io { path: dir.clone(), source })?;
    let path = dir.join("market.json");
    io::save(&spec, &path)?;
    let back = io::load(&path)?;
    println!("round trip through {} is exact: {}", path.display(), back == spec);

    // Every violated invariant is reported, not just the first.
    let broken = MarketSpec::new(vec![1.0, 0.0], vec![vec![0.0, 1.0], vec![0.0, -2.0]], vec![0, 2]);
    match validate(&broken) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
