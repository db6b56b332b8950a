//! Run proportional budget dynamics on a random market, stream the trace to
//! CSV and check the potential and the O(1/T) rate along the way.

use autobid_market::dynamics::{self, rate_report, DynamicsConfig, TraceWriter};
use autobid_market::generate::{generate, ValueDistribution};
use autobid_market::validate;

fn main() -> autobid_market::Result<()> {
    let market = validate(&generate(11, 4, 7, 3, ValueDistribution::LogNormal)?)?;
    let path = std::env::temp_dir().join("autobid-trace.csv");
    let mut writer = TraceWriter::create(&path)?;
    let config = DynamicsConfig::default();
    let start = dynamics::init_split(&market)?;
    let trace = dynamics::run_from(&market, start, &config, |r| writer.append(r))?;

    for r in trace.records.iter().filter(|r| r.t.is_power_of_two()) {
        println!("t={:<6} phi={:.3e} eg={:.9} avg gap={:.3e}", r.t, r.phi, r.eg_objective, r.avg_gap);
    }
    let last = trace.last().expect("at least one round");
    println!("settled after {} rounds: {}", trace.records.len(), trace.stopped_early);
    println!("largest potential increase {:.1e}", trace.max_phi_increase().max(0.0));

    let rate = rate_report(&trace, trace.anchor_objective);
    println!(
        "sup T*g(T) = {:.6} <= phi(1) = {:.6}: {}",
        rate.max_scaled_gap,
        rate.initial_potential,
        rate.holds(1e-6)
    );
    let worst = last
        .utilities
        .totals()
        .iter()
        .zip(&trace.anchor_utilities)
        .map(|(u, v)| (u - v).abs() / v)
        .fold(0.0, f64::max);
    println!("final utilities within {worst:.1e} of the equilibrium; trace in {}", path.display());
    Ok(())
}
