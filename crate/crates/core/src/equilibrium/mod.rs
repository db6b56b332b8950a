//! Pacing equilibria of one seller's sub-market (plain and with additive
//! boosts), the whole-market competitive equilibrium, welfare measures and a
//! brute-force oracle for the Eisenberg-Gale program.

mod boosted;
mod ce;
mod grid;
mod sellers;
mod submarket;
mod verify;
mod welfare;

pub use boosted::solve_submarket_boosted;
pub use ce::{solve_market_boosted, solve_market_ce, MarketEquilibrium};
pub use sellers::SubmarketSolver;
pub use grid::{grid_discretization_bound, grid_search_eg, GridOptimum, GRID_MAX_CELLS};
pub use submarket::{solve_submarket, solve_submarket_from, InnerStart};
pub use verify::{verify_pacing, PacingReport};
pub use welfare::{eg_objective, nsw};

pub(crate) use boosted::solve_submarket_boosted_from;
pub(crate) use submarket::DUST;

use serde::Serialize;

use crate::matrix::Matrix;

/// Activity threshold for treating an allocation entry as positive.
pub const DELTA_ACTIVE: f64 = 1e-7;

/// Additive boosts `c[(i, j)] ≥ 0`, in money units.
pub type BoostMatrix = Matrix;

/// Pacing multipliers, prices and allocation of one (sub-)market.
///
/// Buyers that sit out the market (zero budget, or no positive value on any
/// of its items) carry `alpha = 0` and receive nothing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacingOutcome {
    pub alphas: Vec<f64>,
    pub prices: Vec<f64>,
    pub allocation: Matrix,
    pub utilities: Vec<f64>,
    pub spend: Vec<f64>,
    /// Inner iterations used by the solver that produced this outcome.
    pub iterations: usize,
}

impl PacingOutcome {
    /// Derives prices, utilities and payments from multipliers and an
    /// allocation. Prices are the highest (boosted) bid among buyers with a
    /// positive multiplier.
    pub fn from_parts(
        values: &Matrix,
        boosts: Option<&BoostMatrix>,
        alphas: Vec<f64>,
        allocation: Matrix,
    ) -> Self {
        let (n, m) = values.shape();
        let boost = |i: usize, j: usize| boosts.map_or(0.0, |c| c[(i, j)]);
        let prices: Vec<f64> = (0..m)
            .map(|j| {
                (0..n)
                    .filter(|&i| alphas[i] > 0.0)
                    .map(|i| alphas[i] * values[(i, j)] + boost(i, j))
                    .fold(0.0, f64::max)
            })
            .collect();
        let utilities = (0..n)
            .map(|i| (0..m).map(|j| values[(i, j)] * allocation[(i, j)]).sum())
            .collect();
        let spend = (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| (prices[j] - boost(i, j)) * allocation[(i, j)])
                    .sum()
            })
            .collect();
        Self {
            alphas,
            prices,
            allocation,
            utilities,
            spend,
            iterations: 0,
        }
    }

    /// Seller revenue: Σ_i spend_i.
    pub fn revenue(&self) -> f64 {
        self.spend.iter().sum()
    }
}

/// Inner-solver controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Acceptance threshold on the pacing residuals.
    pub tol: f64,
    pub max_inner: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_inner: 100_000,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Budgets below this fraction of the largest budget in a sub-market are
/// treated as zero; they are far below anything the other buyers can notice.
pub const BUDGET_FLOOR: f64 = 1e-200;

/// Buyers and items that take part in a sub-market solve.
#[derive(Debug, Clone)]
pub(crate) struct Participants {
    /// Buyers with budget above the floor and some positively-valued item.
    pub buyers: Vec<usize>,
    /// Items valued positively by some participating buyer.
    pub items: Vec<usize>,
    pub is_buyer: Vec<bool>,
}

impl Participants {
    pub fn of(values: &Matrix, budgets: &[f64]) -> Self {
        let (n, m) = values.shape();
        let floor = BUDGET_FLOOR * budgets.iter().cloned().fold(0.0, f64::max);
        let is_buyer: Vec<bool> = (0..n)
            .map(|i| budgets[i] > floor && budgets[i] > 0.0 && (0..m).any(|j| values[(i, j)] > 0.0))
            .collect();
        let buyers = (0..n).filter(|&i| is_buyer[i]).collect();
        let items = (0..m)
            .filter(|&j| (0..n).any(|i| is_buyer[i] && values[(i, j)] > 0.0))
            .collect();
        Self {
            buyers,
            items,
            is_buyer,
        }
    }
}

pub(crate) fn check_shapes(values: &Matrix, budgets: &[f64], boosts: Option<&Matrix>) -> crate::Result<()> {
    use crate::Error;
    if values.rows() != budgets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} value rows for {} budgets",
            values.rows(),
            budgets.len()
        )));
    }
    if budgets.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
        return Err(Error::Domain("budgets must be finite and non-negative".into()));
    }
    if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::Domain("values must be finite and non-negative".into()));
    }
    if let Some(c) = boosts {
        if c.shape() != values.shape() {
            return Err(Error::ShapeMismatch(format!(
                "boosts {:?} vs values {:?}",
                c.shape(),
                values.shape()
            )));
        }
        if c.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Domain("boosts must be finite and non-negative".into()));
        }
    }
    Ok(())
}
