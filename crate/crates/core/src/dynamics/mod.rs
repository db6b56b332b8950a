//! Proportional budget dynamics: every round each buyer re-splits its budget
//! across sellers in proportion to the utility each seller delivered.

mod trace;

pub use trace::{rate_report, RateReport, TraceWriter, TRACE_HEADER};

use std::time::{Duration, Instant};

use crate::equilibrium::{
    eg_objective, solve_market_boosted, solve_market_ce, SolverOptions, SubmarketSolver, DUST,
};
use crate::error::{Error, Result};
use crate::market::{BudgetSplit, UtilityMatrix, ValidatedMarket};
use crate::matrix::Matrix;

/// Budget split where each buyer spreads its budget evenly over the sellers
/// owning something it values.
pub fn init_split(market: &ValidatedMarket) -> Result<BudgetSplit> {
    let mut split = Matrix::zeros(market.num_buyers(), market.num_sellers());
    for i in 0..market.num_buyers() {
        let sellers = market.valued_sellers(i);
        if sellers.is_empty() {
            return Err(Error::BuyerValuesNothing { buyer: i });
        }
        for &k in sellers {
            split[(i, k)] = market.budget(i) / sellers.len() as f64;
        }
    }
    Ok(BudgetSplit(split))
}

/// One round: solve every sub-market at `split`, then move each buyer's budget
/// to `B_i · u_i(k) / u_i(K)`.
pub fn step(
    market: &ValidatedMarket,
    split: &BudgetSplit,
    boosts: Option<&Matrix>,
    tol_inner: f64,
) -> Result<(UtilityMatrix, BudgetSplit)> {
    check_split(market, split)?;
    if let Some(c) = boosts {
        market.check_boosts(c)?;
    }
    let mut solver = SubmarketSolver::new(market, boosts, SolverOptions::with_tol(tol_inner));
    advance(market, &mut solver, split)
}

fn advance(
    market: &ValidatedMarket,
    solver: &mut SubmarketSolver,
    split: &BudgetSplit,
) -> Result<(UtilityMatrix, BudgetSplit)> {
    let u = solver.utilities(split)?;
    let mut next = Matrix::zeros(split.rows(), split.cols());
    for i in 0..split.rows() {
        let total = u.row_sum(i);
        if total <= 0.0 {
            return Err(Error::NonPositiveUtility { buyer: i, value: total });
        }
        for k in 0..split.cols() {
            next[(i, k)] = market.budget(i) * u[(i, k)] / total;
        }
    }
    Ok((u, BudgetSplit(next)))
}

fn check_split(market: &ValidatedMarket, split: &BudgetSplit) -> Result<()> {
    if split.shape() != (market.num_buyers(), market.num_sellers()) {
        return Err(Error::ShapeMismatch(format!(
            "split is {:?}, market has {} buyers and {} sellers",
            split.shape(),
            market.num_buyers(),
            market.num_sellers()
        )));
    }
    if split.iter().any(|&b| !(b >= 0.0 && b.is_finite())) {
        return Err(Error::Domain("budget split entries must be finite and non-negative".into()));
    }
    Ok(())
}

/// KL-style distance `Σ_{i,k} B_i(k,*) ln(B_i(k,*) / B_i(k))` from `split` to
/// an anchor split. Terms with a zero anchor entry are skipped.
pub fn potential(split: &BudgetSplit, anchor: &BudgetSplit) -> Result<f64> {
    if split.shape() != anchor.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", split.shape(), anchor.shape())));
    }
    let mut phi = 0.0;
    for (&b, &a) in split.iter().zip(anchor.iter()) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return Err(Error::Domain(format!(
                "split entry is {b} where the anchor holds {a}"
            )));
        }
        phi += a * (a / b).ln();
    }
    Ok(phi)
}

/// Controls for [`run`].
#[derive(Debug, Clone)]
pub struct DynamicsConfig {
    /// Maximum number of rounds.
    pub rounds: usize,
    /// Stop once `max_i |u_i(K,t) − u_i(K,t−1)| / u_i(K,t)` falls below this
    /// and every split entry has moved by less than this relative amount or
    /// is negligible against its buyer's budget.
    pub stop_early: f64,
    /// Tolerance of every sub-market solve.
    pub tol_inner: f64,
    /// Fixed additive boosts applied in every round.
    pub boosts: Option<Matrix>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            rounds: 10_000,
            stop_early: 1e-10,
            tol_inner: 1e-9,
            boosts: None,
        }
    }
}

/// State and diagnostics of round `t`.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub t: usize,
    /// `B_i(k,t)`, the split the round was played with.
    pub split: BudgetSplit,
    /// `u_i(k,t)`.
    pub utilities: UtilityMatrix,
    /// Φ(t) measured against the trace anchor.
    pub phi: f64,
    /// Σ_i B_i ln u_i(K,t).
    pub eg_objective: f64,
    /// (1/t) Σ_{s≤t} (anchor objective − EG(s)).
    pub avg_gap: f64,
    pub wall_time: Duration,
}

/// Rounds of one dynamics run.
#[derive(Debug, Clone)]
pub struct DynamicsTrace {
    pub records: Vec<RoundRecord>,
    /// Split the run is measured against: the competitive-equilibrium split,
    /// or the market-wide boosted equilibrium split when boosts are present.
    /// Equilibrium splits need not be unique; Φ refers to this one.
    pub anchor: BudgetSplit,
    /// EG objective at the anchor equilibrium.
    pub anchor_objective: f64,
    /// Per-buyer total utilities at the anchor equilibrium.
    pub anchor_utilities: Vec<f64>,
    /// Split after the last recorded round.
    pub final_split: BudgetSplit,
    pub stopped_early: bool,
}

impl DynamicsTrace {
    pub fn last(&self) -> Option<&RoundRecord> {
        self.records.last()
    }

    /// u_i(K) in the last recorded round.
    pub fn final_utilities(&self) -> Option<Vec<f64>> {
        self.last().map(|r| r.utilities.totals())
    }

    /// Largest increase of Φ between consecutive rounds (non-positive when
    /// the potential is monotone).
    pub fn max_phi_increase(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[1].phi - w[0].phi)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A run that stopped on a solver error, with every round completed so far.
#[derive(Debug, thiserror::Error)]
#[error("dynamics stopped after {} rounds: {source}", partial.records.len())]
pub struct DynamicsError {
    #[source]
    pub source: Error,
    pub partial: Box<DynamicsTrace>,
}

impl From<DynamicsError> for Error {
    fn from(e: DynamicsError) -> Self {
        e.source
    }
}

/// Runs the dynamics from [`init_split`].
pub fn run(market: &ValidatedMarket, config: &DynamicsConfig) -> Result<DynamicsTrace, DynamicsError> {
    let start = init_split(market).map_err(|e| empty_failure(market, e))?;
    run_from(market, start, config, |_| Ok(()))
}

/// Runs the dynamics from `start`, calling `on_round` after every round.
pub fn run_from(
    market: &ValidatedMarket,
    start: BudgetSplit,
    config: &DynamicsConfig,
    mut on_round: impl FnMut(&RoundRecord) -> Result<()>,
) -> Result<DynamicsTrace, DynamicsError> {
    let opts = SolverOptions::with_tol(config.tol_inner);
    let prepared = (|| {
        check_split(market, &start)?;
        if config.rounds == 0 {
            return Err(Error::Domain("at least one round is required".into()));
        }
        let eq = match &config.boosts {
            Some(c) => solve_market_boosted(market, c, &opts)?,
            None => solve_market_ce(market, &opts)?,
        };
        let objective = eg_objective(market.budgets(), &eq.totals())?;
        Ok((eq, objective))
    })();
    let (eq, anchor_objective) = prepared.map_err(|e| empty_failure(market, e))?;

    let mut trace = DynamicsTrace {
        records: Vec::new(),
        anchor_utilities: eq.totals(),
        anchor: eq.split,
        anchor_objective,
        final_split: start.clone(),
        stopped_early: false,
    };
    let mut solver = SubmarketSolver::new(market, config.boosts.as_ref(), opts);
    let mut split = start;
    let mut gap_sum = 0.0;
    let mut previous: Option<Vec<f64>> = None;

    for t in 1..=config.rounds {
        let began = Instant::now();
        let round = (|| {
            let phi = potential(&split, &trace.anchor)?;
            let (u, next) = advance(market, &mut solver, &split)?;
            let totals = u.totals();
            let eg = eg_objective(market.budgets(), &totals)?;
            Ok((phi, u, next, totals, eg))
        })();
        let (phi, utilities, next, totals, eg) = match round {
            Ok(r) => r,
            Err(source) => {
                return Err(DynamicsError {
                    source,
                    partial: Box::new(trace),
                })
            }
        };
        gap_sum += trace.anchor_objective - eg;
        let record = RoundRecord {
            t,
            split: std::mem::replace(&mut split, next),
            utilities,
            phi,
            eg_objective: eg,
            avg_gap: gap_sum / t as f64,
            wall_time: began.elapsed(),
        };
        if let Err(source) = on_round(&record) {
            return Err(DynamicsError {
                source,
                partial: Box::new(trace),
            });
        }
        // Entries still moving relative to themselves keep the run going,
        // unless they are too small to affect any sub-market outcome.
        let settled = record.split.iter().zip(split.iter()).enumerate().all(|(idx, (&old, &new))| {
            let dust = DUST * market.budget(idx / split.cols());
            (new - old).abs() <= config.stop_early * old || new <= dust
        });
        trace.records.push(record);
        trace.final_split = split.clone();

        let change = previous.as_ref().map(|p| {
            totals
                .iter()
                .zip(p)
                .map(|(u, v)| (u - v).abs() / u)
                .fold(0.0, f64::max)
        });
        if settled && change.is_some_and(|c| c < config.stop_early) {
            trace.stopped_early = true;
            break;
        }
        previous = Some(totals);
    }
    Ok(trace)
}

fn empty_failure(market: &ValidatedMarket, source: Error) -> DynamicsError {
    let zeros = BudgetSplit(Matrix::zeros(market.num_buyers(), market.num_sellers()));
    DynamicsError {
        source,
        partial: Box::new(DynamicsTrace {
            records: Vec::new(),
            anchor: zeros.clone(),
            anchor_objective: f64::NAN,
            anchor_utilities: Vec::new(),
            final_split: zeros,
            stopped_early: false,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric() -> ValidatedMarket {
        ValidatedMarket::from_parts(vec![1.0, 1.0], vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![0, 1])
    }

    #[test]
    fn uniform_start() {
        let s = init_split(&symmetric()).unwrap();
        assert!(s.iter().all(|&b| b == 0.5));
        let m = ValidatedMarket::from_parts(vec![1.0, 2.0], vec![vec![1.0, 0.0], vec![1.0, 1.0]], vec![0, 1]);
        let s = init_split(&m).unwrap();
        assert_eq!(s.row(0), &[1.0, 0.0]);
        assert_eq!(s.row(1), &[1.0, 1.0]);
    }

    #[test]
    fn buyer_without_values_is_rejected() {
        let m = ValidatedMarket::from_parts(vec![1.0, 1.0], vec![vec![1.0, 1.0], vec![0.0, 0.0]], vec![0, 1]);
        assert!(matches!(init_split(&m), Err(Error::BuyerValuesNothing { buyer: 1 })));
    }

    #[test]
    fn potential_basics() {
        let a = BudgetSplit(Matrix::from_nested(&[[0.25, 0.75], [1.0, 0.0]]));
        assert_eq!(potential(&a, &a).unwrap(), 0.0);
        let b = BudgetSplit(Matrix::from_nested(&[[0.5, 0.5], [0.5, 0.5]]));
        assert!(potential(&b, &a).unwrap() > 0.0);
        assert!(matches!(potential(&a, &b), Err(Error::Domain(_))));
    }

    #[test]
    fn symmetric_run_reaches_equilibrium() {
        let cfg = DynamicsConfig {
            rounds: 50,
            ..DynamicsConfig::default()
        };
        let trace = run(&symmetric(), &cfg).unwrap();
        let u = trace.final_utilities().unwrap();
        assert!((u[0] - 2.0).abs() < 1e-6 && (u[1] - 2.0).abs() < 1e-6, "{u:?}");
        assert!(trace.max_phi_increase() <= 1e-8);
    }

    #[test]
    fn equilibrium_split_is_fixed() {
        let m = symmetric();
        let ce = solve_market_ce(&m, &SolverOptions::default()).unwrap();
        let (_, next) = step(&m, &ce.split, None, 1e-9).unwrap();
        assert!(next.max_abs_diff(&ce.split) < 1e-8);
    }
}
