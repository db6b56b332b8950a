//! The acceptance battery: every guarantee of the library checked over
//! seeded instance families, with one summary row per check.
//!
//! Instances are fanned out over the rayon pool; results are collected in
//! seed order, so the output depends only on the seeds.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{self, rate_report, DynamicsConfig};
use crate::equilibrium::{
    eg_objective, grid_discretization_bound, grid_search_eg, solve_market_ce, solve_submarket,
    solve_submarket_boosted, verify_pacing, PacingOutcome, SolverOptions, SubmarketSolver,
};
use crate::error::{Error, Result};
use crate::generate::{generate, generate_boosts, ValueDistribution};
use crate::incentives::{
    buyer_deviation_report, crossed_pair_utility, default_epsilon, incentive_ratio_at, seller_best_response,
    synthesize_boosts, BestResponseOptions,
};
use crate::market::{validate, MarketSpec, ValidatedMarket};
use crate::matrix::Matrix;
use crate::seller_game::{audit_pne, PneOptions, PneStart};

/// Direction in which a check's worst value is compared with its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    AtMost,
    AtLeast,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AtMost => "<=",
            Self::AtLeast => ">=",
        })
    }
}

/// Summary of one check over its instance family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    /// Acceptance criterion number; several checks may share one.
    pub criterion: u8,
    pub name: &'static str,
    pub instances: usize,
    /// Worst observed value over all instances.
    pub worst: f64,
    pub sense: Sense,
    pub bound: f64,
    pub pass: bool,
    /// First failing record, empty when the check passes.
    pub failure: String,
}

/// One instance's contribution to a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceRecord {
    pub criterion: u8,
    pub name: &'static str,
    pub instance: u64,
    pub value: f64,
    pub pass: bool,
    pub note: String,
}

impl InstanceRecord {
    fn new(criterion: u8, name: &'static str, instance: u64, value: f64, pass: bool) -> Self {
        Self {
            criterion,
            name,
            instance,
            value,
            pass,
            note: String::new(),
        }
    }

    fn failed(criterion: u8, name: &'static str, instance: u64, err: &Error) -> Self {
        Self {
            criterion,
            name,
            instance,
            value: f64::NAN,
            pass: false,
            note: err.to_string(),
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = note;
        self
    }
}

/// Everything one battery run produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seeds: Vec<u64>,
    pub checks: Vec<CheckSummary>,
    pub records: Vec<InstanceRecord>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Whether every check of `criterion` passed (false if there is none).
    pub fn criterion_passes(&self, criterion: u8) -> bool {
        let mut rows = self.checks.iter().filter(|c| c.criterion == criterion).peekable();
        rows.peek().is_some() && rows.all(|c| c.pass)
    }

    /// Fixed-width table for humans.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<4} {:<24} {:>9} {:>14} {:>4} {:>10}  {}\n",
            "id", "check", "instances", "worst", "", "bound", "pass"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<4} {:<24} {:>9} {:>14.6e} {:>4} {:>10.1e}  {}",
                c.criterion,
                c.name,
                c.instances,
                c.worst,
                c.sense,
                c.bound,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        out
    }

    /// `criterion,check,instances,worst,sense,bound,pass` with shortest
    /// round-trip floats.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("criterion,check,instances,worst,sense,bound,pass\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.criterion, c.name, c.instances, c.worst, c.sense, c.bound, c.pass
            );
        }
        out
    }

    /// `criterion,check,instance,value,pass,note`, one row per instance.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("criterion,check,instance,value,pass,note\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},\"{}\"",
                r.criterion,
                r.name,
                r.instance,
                r.value,
                r.pass,
                r.note.replace('"', "'")
            );
        }
        out
    }
}

/// Family sizes of the battery; each check uses the first seeds of the run.
pub mod family {
    /// Boosted dynamics instances.
    pub const BOOSTED: usize = 20;
    /// Buyer, seller and seller-game instances.
    pub const AUDIT: usize = 30;
    /// (sub-market, budget ladder) pairs per seed.
    pub const LADDERS_PER_SEED: usize = 20;
    /// Synthesis targets per seed.
    pub const TARGETS_PER_SEED: usize = 2;
    /// Random restarts for the seller game.
    pub const PNE_STARTS: usize = 5;
}

/// Random market with at most 5 buyers, 8 items and 3 sellers.
pub fn dynamics_instance(seed: u64) -> MarketSpec {
    let n = 2 + (seed % 4) as usize;
    let k = 1 + ((seed / 4) % 3) as usize;
    let m = k + ((seed * 7) % (9 - k as u64)) as usize;
    let dist = match seed % 3 {
        0 => ValueDistribution::Uniform01,
        1 => ValueDistribution::LogNormal,
        _ => ValueDistribution::Sparse(0.3),
    };
    generate(seed, n, m, k, dist).expect("family shapes are feasible")
}

/// Random market with 2 or 3 sellers, every buyer valuing every item.
pub fn audit_instance(seed: u64) -> MarketSpec {
    let n = 2 + (seed % 4) as usize;
    let k = 2 + (seed % 2) as usize;
    let m = k + (seed % 5) as usize + 1;
    let dist = if seed % 2 == 0 {
        ValueDistribution::LogNormal
    } else {
        ValueDistribution::Uniform01
    };
    generate(seed, n, m, k, dist).expect("family shapes are feasible")
}

/// Random market small enough for exhaustive grid search (`n·m ≤ 6`).
pub fn small_instance(seed: u64) -> MarketSpec {
    const SHAPES: [(usize, usize, usize); 6] = [(2, 2, 1), (2, 2, 2), (2, 3, 2), (3, 2, 2), (2, 3, 3), (3, 2, 1)];
    let (n, m, k) = SHAPES[(seed % SHAPES.len() as u64) as usize];
    generate(seed, n, m, k, ValueDistribution::Uniform01).expect("family shapes are feasible")
}

fn market(spec: &MarketSpec) -> ValidatedMarket {
    validate(spec).expect("generated markets are valid")
}

fn summarize(
    criterion: u8,
    name: &'static str,
    sense: Sense,
    bound: f64,
    records: &[InstanceRecord],
) -> CheckSummary {
    let mine: Vec<&InstanceRecord> = records
        .iter()
        .filter(|r| r.criterion == criterion && r.name == name)
        .collect();
    let pick = |a: f64, b: f64| match sense {
        Sense::AtMost => a.max(b),
        Sense::AtLeast => a.min(b),
    };
    let start = match sense {
        Sense::AtMost => f64::NEG_INFINITY,
        Sense::AtLeast => f64::INFINITY,
    };
    let worst = mine
        .iter()
        .map(|r| if r.value.is_nan() { -start } else { r.value })
        .fold(start, pick);
    let failure = mine
        .iter()
        .find(|r| !r.pass)
        .map(|r| format!("instance {}: value {} {}", r.instance, r.value, r.note).trim_end().to_string())
        .unwrap_or_default();
    CheckSummary {
        criterion,
        name,
        instances: mine.len(),
        worst,
        sense,
        bound,
        pass: !mine.is_empty() && failure.is_empty(),
        failure,
    }
}

/// Budgets of the second crossed-pair buyer at which the curve is checked.
pub const CROSSED_PAIR_BUDGETS: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 10.0];

/// Sub-market utility of the second crossed-pair buyer against the closed form.
pub fn check_crossed_pair() -> Vec<InstanceRecord> {
    let values = Matrix::from_nested(&[[2.0, 1.0], [1.0, 2.0]]);
    CROSSED_PAIR_BUDGETS
        .iter()
        .enumerate()
        .map(|(idx, &b)| match solve_submarket(&values, &[2.0, b], &SolverOptions::default()) {
            Ok(out) => {
                let err = (out.utilities[1] - crossed_pair_utility(b)).abs();
                InstanceRecord::new(1, "crossed_pair_curve", idx as u64, err, err <= 1e-6)
                    .with_note(format!("b={b}"))
            }
            Err(e) => InstanceRecord::failed(1, "crossed_pair_curve", idx as u64, &e),
        })
        .collect()
}

/// Dynamics convergence, potential monotonicity, rate bound and the
/// equilibrium fixed point on one instance.
pub fn check_dynamics(seed: u64) -> Vec<InstanceRecord> {
    let mk = market(&dynamics_instance(seed));
    let config = DynamicsConfig::default();
    let mut out = Vec::new();
    match dynamics::run(&mk, &config) {
        Ok(trace) => {
            let got = trace.final_utilities().unwrap_or_default();
            let err = got
                .iter()
                .zip(&trace.anchor_utilities)
                .map(|(a, b)| (a - b).abs() / b.abs())
                .fold(0.0, f64::max);
            let rounds = trace.records.len();
            out.push(
                InstanceRecord::new(2, "dynamics_convergence", seed, err, err <= 1e-4)
                    .with_note(format!("rounds={rounds}")),
            );
            let rise = trace.max_phi_increase().max(0.0);
            out.push(InstanceRecord::new(2, "potential_monotone", seed, rise, rise <= 1e-8));
            let rate = rate_report(&trace, trace.anchor_objective);
            let excess = rate.max_scaled_gap - rate.initial_potential;
            out.push(InstanceRecord::new(3, "rate_bound", seed, excess, excess <= 1e-6));
        }
        Err(e) => {
            for (c, name) in [(2, "dynamics_convergence"), (2, "potential_monotone"), (3, "rate_bound")] {
                out.push(InstanceRecord::failed(c, name, seed, &e.source));
            }
        }
    }
    let fixed = (|| {
        let ce = solve_market_ce(&mk, &SolverOptions::with_tol(config.tol_inner))?;
        let (_, next) = dynamics::step(&mk, &ce.split, None, config.tol_inner)?;
        Ok::<f64, Error>(next.max_abs_diff(&ce.split))
    })();
    out.push(match fixed {
        Ok(d) => InstanceRecord::new(4, "fixed_point", seed, d, d <= 10.0 * config.tol_inner),
        Err(e) => InstanceRecord::failed(4, "fixed_point", seed, &e),
    });
    out
}

/// Boosted dynamics limit checked as a market-wide boosted pacing equilibrium.
pub fn check_boosted_dynamics(seed: u64) -> InstanceRecord {
    let spec = dynamics_instance(seed);
    let mk = market(&spec);
    let boosts = Matrix::from_rows(generate_boosts(seed, mk.num_buyers(), mk.num_items(), 0.5))
        .expect("rectangular boosts");
    let config = DynamicsConfig {
        boosts: Some(boosts.clone()),
        ..DynamicsConfig::default()
    };
    let result = (|| {
        let trace = dynamics::run(&mk, &config)?;
        let mut solver = SubmarketSolver::new(&mk, Some(&boosts), SolverOptions::with_tol(config.tol_inner));
        let outcome = solver.market_outcome(&mk, &trace.final_split)?;
        let report = verify_pacing(&outcome, mk.values(), mk.budgets(), Some(&boosts), 1e-6);
        Ok::<_, Error>((report, trace.records.len()))
    })();
    match result {
        Ok((r, rounds)) => InstanceRecord::new(5, "boosted_convergence", seed, r.max_residual(), r.pass)
            .with_note(format!("rounds={rounds}")),
        Err(e) => InstanceRecord::failed(5, "boosted_convergence", seed, &e),
    }
}

/// Every buyer's grid best response against its equalized split at the
/// competitive equilibrium.
pub fn check_buyer_audit(seed: u64) -> InstanceRecord {
    let mk = market(&audit_instance(seed));
    let result = (|| {
        let ce = solve_market_ce(&mk, &SolverOptions::default())?;
        let mut worst: f64 = 0.0;
        let mut pass = true;
        let mut note = String::new();
        for b in 0..mk.num_buyers() {
            let r = buyer_deviation_report(&mk, b, &ce.split, 200, 1e-9)?;
            worst = worst.max(r.ratio);
            if !r.pass && pass {
                pass = false;
                note = format!("buyer {b}: best {} vs equalized {}", r.best_utility, r.equalized.utility);
            }
        }
        Ok::<_, Error>((worst, pass, note))
    })();
    match result {
        Ok((w, pass, note)) => InstanceRecord::new(6, "buyer_two_approx", seed, w, pass).with_note(note),
        Err(e) => InstanceRecord::failed(6, "buyer_two_approx", seed, &e),
    }
}

/// Budget ladders for one buyer in random sub-markets: its utility must not
/// fall and its utility per unit of budget must not rise.
pub fn check_monotonicity(seed: u64) -> Vec<InstanceRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1add_e125);
    (0..family::LADDERS_PER_SEED)
        .map(|l| {
            let id = seed * family::LADDERS_PER_SEED as u64 + l as u64;
            let n = rng.random_range(2..=5usize);
            let m = rng.random_range(1..=4usize);
            let values = Matrix::from_rows(
                (0..n)
                    .map(|_| (0..m).map(|_| rng.random_range(0.05..1.0)).collect())
                    .collect(),
            )
            .expect("rectangular values");
            let mut budgets: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            let buyer = rng.random_range(0..n);
            let mut prev: Option<(f64, f64)> = None;
            let mut worst: f64 = 0.0;
            for step in 0..12 {
                let b = 0.05 * 1.6f64.powi(step);
                budgets[buyer] = b;
                let out = match solve_submarket(&values, &budgets, &SolverOptions::default()) {
                    Ok(o) => o,
                    Err(e) => return InstanceRecord::failed(7, "budget_monotonicity", id, &e),
                };
                let u = out.utilities[buyer];
                if let Some((pu, pr)) = prev {
                    worst = worst.max(pu - u).max(u / b - pr);
                }
                prev = Some((u, u / b));
            }
            InstanceRecord::new(7, "budget_monotonicity", id, worst, worst <= 1e-8)
        })
        .collect()
}

/// Random clearing targets: the synthesized multipliers and boosts must
/// certify the target and the boosted solver must land on its utilities.
pub fn check_boost_synthesis(seed: u64) -> Vec<InstanceRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb005_7ed5);
    (0..family::TARGETS_PER_SEED)
        .map(|t| {
            let id = seed * family::TARGETS_PER_SEED as u64 + t as u64;
            let n = rng.random_range(2..=4usize);
            let m = rng.random_range(1..=4usize);
            let values = Matrix::from_rows(
                (0..n)
                    .map(|_| (0..m).map(|_| rng.random_range(0.05..1.0)).collect())
                    .collect(),
            )
            .expect("rectangular values");
            let budgets: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            let target = random_target(&mut rng, n, m);
            let result = (|| {
                let (alphas, boosts) = synthesize_boosts(&values, &budgets, &target)?;
                let claimed = PacingOutcome::from_parts(&values, Some(&boosts), alphas, target.clone());
                let report = verify_pacing(&claimed, &values, &budgets, Some(&boosts), 1e-6);
                let solved = solve_submarket_boosted(&values, &budgets, &boosts, &SolverOptions::default())?;
                let err = solved
                    .utilities
                    .iter()
                    .zip(&claimed.utilities)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                Ok::<_, Error>((report, err))
            })();
            match result {
                Ok((r, err)) => InstanceRecord::new(8, "boost_synthesis", id, err, r.pass && err <= 1e-9)
                    .with_note(if r.pass { String::new() } else { format!("pacing residual {}", r.max_residual()) }),
                Err(e) => InstanceRecord::failed(8, "boost_synthesis", id, &e),
            }
        })
        .collect()
}

/// A column-stochastic allocation in which every buyer receives something.
fn random_target(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Matrix {
    loop {
        let mut x = Matrix::zeros(n, m);
        for j in 0..m {
            for i in 0..n {
                if rng.random::<f64>() < 0.6 {
                    x[(i, j)] = rng.random::<f64>();
                }
            }
            if x.col_sum(j) <= 0.0 {
                x[(rng.random_range(0..n), j)] = 1.0;
            }
            let s = x.col_sum(j);
            for i in 0..n {
                x[(i, j)] /= s;
            }
        }
        if (0..n).all(|i| x.row_sum(i) > 0.0) {
            return x;
        }
    }
}

/// Every seller's best deviation from the competitive equilibrium.
pub fn check_seller_audit(seed: u64) -> InstanceRecord {
    let mk = market(&audit_instance(seed));
    let result = (|| {
        let ce = solve_market_ce(&mk, &SolverOptions::default())?;
        let mut worst: f64 = 0.0;
        let mut pass = true;
        let mut note = String::new();
        for s in 0..mk.num_sellers() {
            let r = incentive_ratio_at(&mk, &ce.utilities, &ce.split, s, 1e-6)?;
            worst = worst.max(r.ratio);
            if !r.pass && pass {
                pass = false;
                note = format!("seller {s}: ratio {} gap {}", r.ratio, r.gap);
            }
        }
        Ok::<_, Error>((worst, pass, note))
    })();
    match result {
        Ok((w, pass, note)) => InstanceRecord::new(9, "seller_incentive_ratio", seed, w, pass).with_note(note),
        Err(e) => InstanceRecord::failed(9, "seller_incentive_ratio", seed, &e),
    }
}

/// Seller-game equilibria from several starts: agreement, certification and
/// welfare against the competitive equilibrium.
pub fn check_seller_game(seed: u64) -> Vec<InstanceRecord> {
    let mk = market(&audit_instance(seed));
    let starts: Vec<PneStart> = std::iter::once(PneStart::Uniform)
        .chain((1..family::PNE_STARTS as u64).map(|r| PneStart::Random(seed * 1000 + r)))
        .collect();
    match audit_pne(&mk, &PneOptions::default(), &starts, 1e-6) {
        Ok(a) => vec![
            InstanceRecord::new(10, "pne_uniqueness", seed, a.spread / a.tol, a.unique()).with_note(
                if a.verified.pass {
                    String::new()
                } else {
                    format!("improvements {:?}", a.verified.improvements)
                },
            ),
            InstanceRecord::new(11, "nsw_fairness", seed, a.fairness.ratio - a.fairness.bound, a.fairness.pass)
                .with_note(format!("ratio={} delta={}", a.fairness.ratio, a.fairness.delta)),
        ],
        Err(e) => vec![
            InstanceRecord::failed(10, "pne_uniqueness", seed, &e),
            InstanceRecord::failed(11, "nsw_fairness", seed, &e),
        ],
    }
}

/// Grid resolution of the exhaustive Eisenberg-Gale oracle.
pub const EG_GRID_RESOLUTION: usize = 30;
/// Grid resolution of the seller revenue oracle.
pub const SELLER_GRID_RESOLUTION: usize = 400;

/// Solver against exhaustive oracles on a tiny market.
pub fn check_oracles(seed: u64) -> Vec<InstanceRecord> {
    let mk = market(&small_instance(seed));
    let mut out = Vec::new();
    let eg = (|| {
        let ce = solve_market_ce(&mk, &SolverOptions::default())?;
        let totals = ce.totals();
        let solved = eg_objective(mk.budgets(), &totals)?;
        let grid = grid_search_eg(&mk, EG_GRID_RESOLUTION)?;
        let bound = grid_discretization_bound(&mk, &totals, EG_GRID_RESOLUTION);
        Ok::<_, Error>(((solved - grid.objective).abs() - bound, solved >= grid.objective - 1e-9))
    })();
    out.push(match eg {
        Ok((excess, above)) => InstanceRecord::new(12, "eg_grid_oracle", seed, excess, excess <= 1e-3 && above),
        Err(e) => InstanceRecord::failed(12, "eg_grid_oracle", seed, &e),
    });
    if mk.num_buyers() == 2 && mk.num_sellers() >= 2 {
        let br = (|| {
            let ce = solve_market_ce(&mk, &SolverOptions::default())?;
            let floor = default_epsilon(&mk);
            let mut worst: f64 = 0.0;
            let mut above = true;
            for s in 0..mk.num_sellers() {
                let values = mk.seller_values(s);
                if values.cols() > 2 {
                    continue;
                }
                let w: Vec<f64> = (0..2)
                    .map(|i| (ce.utilities.row_sum(i) - ce.utilities[(i, s)]).max(floor))
                    .collect();
                let br = seller_best_response(&mk, s, &w, &BestResponseOptions::default())?;
                let grid = seller_grid_revenue(&values, mk.budgets(), &w, SELLER_GRID_RESOLUTION);
                worst = worst.max((br.revenue - grid).abs());
                above &= br.revenue >= grid - 1e-12;
            }
            Ok::<_, Error>((worst, above))
        })();
        out.push(match br {
            Ok((d, above)) => InstanceRecord::new(12, "seller_grid_oracle", seed, d, d <= 1e-4 && above),
            Err(e) => InstanceRecord::failed(12, "seller_grid_oracle", seed, &e),
        });
    }
    out
}

/// Best revenue over a dense grid of two-buyer allocations of at most two
/// items (`x_0j` on the grid, the rest to buyer 1), refined twice by
/// re-gridding the neighbourhood of the best point.
pub fn seller_grid_revenue(values: &Matrix, budgets: &[f64], w: &[f64], r: usize) -> f64 {
    assert!(values.rows() == 2 && values.cols() <= 2, "two buyers, at most two items");
    let dims = values.cols();
    let revenue = |x: &[f64]| {
        let u0: f64 = x.iter().enumerate().map(|(j, x)| values[(0, j)] * x).sum();
        let u1: f64 = x.iter().enumerate().map(|(j, x)| values[(1, j)] * (1.0 - x)).sum();
        budgets[0] * u0 / (u0 + w[0]) + budgets[1] * u1 / (u1 + w[1])
    };
    let mut lo = vec![0.0; dims];
    let mut hi = vec![1.0; dims];
    let mut best = (f64::NEG_INFINITY, vec![0.0; dims]);
    for _ in 0..3 {
        let point = |d: usize, a: usize| lo[d] + (hi[d] - lo[d]) * a as f64 / r as f64;
        let cells = (r + 1).pow(dims as u32);
        for idx in 0..cells {
            let x: Vec<f64> = (0..dims).map(|d| point(d, (idx / (r + 1).pow(d as u32)) % (r + 1))).collect();
            let v = revenue(&x);
            if v > best.0 {
                best = (v, x);
            }
        }
        for d in 0..dims {
            let h = (hi[d] - lo[d]) / r as f64;
            lo[d] = (best.1[d] - h).max(0.0);
            hi[d] = (best.1[d] + h).min(1.0);
        }
    }
    best.0
}

/// Runs the whole battery on `seeds`.
pub fn run_suite(seeds: &[u64]) -> SuiteReport {
    let first = |count: usize| &seeds[..count.min(seeds.len())];
    let flat = |parts: Vec<Vec<InstanceRecord>>| parts.into_iter().flatten().collect::<Vec<_>>();

    let mut records = check_crossed_pair();
    records.extend(flat(seeds.par_iter().map(|&s| check_dynamics(s)).collect()));
    records.extend(first(family::BOOSTED).par_iter().map(|&s| check_boosted_dynamics(s)).collect::<Vec<_>>());
    records.extend(first(family::AUDIT).par_iter().map(|&s| check_buyer_audit(s)).collect::<Vec<_>>());
    records.extend(flat(seeds.par_iter().map(|&s| check_monotonicity(s)).collect()));
    records.extend(flat(seeds.par_iter().map(|&s| check_boost_synthesis(s)).collect()));
    records.extend(first(family::AUDIT).par_iter().map(|&s| check_seller_audit(s)).collect::<Vec<_>>());
    records.extend(flat(first(family::AUDIT).par_iter().map(|&s| check_seller_game(s)).collect()));
    records.extend(flat(seeds.par_iter().map(|&s| check_oracles(s)).collect()));

    use Sense::*;
    let checks = vec![
        summarize(1, "crossed_pair_curve", AtMost, 1e-6, &records),
        summarize(2, "dynamics_convergence", AtMost, 1e-4, &records),
        summarize(2, "potential_monotone", AtMost, 1e-8, &records),
        summarize(3, "rate_bound", AtMost, 1e-6, &records),
        summarize(4, "fixed_point", AtMost, 1e-8, &records),
        summarize(5, "boosted_convergence", AtMost, 1e-6, &records),
        summarize(6, "buyer_two_approx", AtMost, crate::incentives::BUYER_BOUND, &records),
        summarize(7, "budget_monotonicity", AtMost, 1e-8, &records),
        summarize(8, "boost_synthesis", AtMost, 1e-9, &records),
        summarize(9, "seller_incentive_ratio", AtMost, crate::incentives::SELLER_BOUND, &records),
        summarize(10, "pne_uniqueness", AtMost, 10.0, &records),
        summarize(11, "nsw_fairness", AtLeast, -1e-6, &records),
        summarize(12, "eg_grid_oracle", AtMost, 1e-3, &records),
        summarize(12, "seller_grid_oracle", AtMost, 1e-4, &records),
    ];
    SuiteReport {
        seeds: seeds.to_vec(),
        checks,
        records,
    }
}

/// Parses `a..b` (inclusive) or a single seed.
pub fn parse_seed_range(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Domain(format!("seed range `{text}` is not `a..b` or a single seed"));
    match text.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![text.trim().parse().map_err(|_| bad())?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seed_range("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seed_range("4..=4").unwrap(), vec![4]);
        assert_eq!(parse_seed_range("7").unwrap(), vec![7]);
        assert!(parse_seed_range("3..1").is_err());
        assert!(parse_seed_range("x").is_err());
    }

    #[test]
    fn families_respect_limits() {
        for s in 0..60 {
            let d = dynamics_instance(s);
            assert!(d.budgets.len() <= 5 && d.seller_of.len() <= 8);
            assert!(d.seller_of.iter().all(|&k| k < 3));
            let t = small_instance(s);
            assert!(t.budgets.len() * t.seller_of.len() <= 6);
        }
    }

    #[test]
    fn crossed_pair_passes() {
        assert!(check_crossed_pair().iter().all(|r| r.pass));
    }
}
