use serde::Serialize;

use super::{BoostMatrix, Participants, PacingOutcome, DELTA_ACTIVE};
use crate::matrix::Matrix;

/// Residuals of the four pacing-equilibrium conditions.
///
/// Price and winner residuals are relative to `max(1, p_j)`, budget residuals
/// relative to the buyer's budget, clearing residuals are absolute fractions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacingReport {
    pub price_consistency: f64,
    pub winner_maximality: f64,
    pub market_clearing: f64,
    pub budget_depletion: f64,
    pub tol: f64,
    pub pass: bool,
}

impl PacingReport {
    pub fn max_residual(&self) -> f64 {
        self.price_consistency
            .max(self.winner_maximality)
            .max(self.market_clearing)
            .max(self.budget_depletion)
    }
}

/// Checks an outcome against the (boosted) first-price pacing conditions:
/// prices equal the top bid, every winner bids the top bid, each contested
/// item clears, and each participating buyer spends exactly its budget.
///
/// Ties are never resolved: any fractional split among top bidders passes.
/// Non-finite entries anywhere in the outcome fail the price check.
pub fn verify_pacing(
    outcome: &PacingOutcome,
    values: &Matrix,
    budgets: &[f64],
    boosts: Option<&BoostMatrix>,
    tol: f64,
) -> PacingReport {
    let (n, m) = values.shape();
    let part = Participants::of(values, budgets);
    let boost = |i: usize, j: usize| boosts.map_or(0.0, |c| c[(i, j)]);
    let bid = |i: usize, j: usize| outcome.alphas[i] * values[(i, j)] + boost(i, j);
    let x = &outcome.allocation;

    let mut price = 0.0_f64;
    let mut winner = 0.0_f64;
    for j in 0..m {
        let top = part.buyers.iter().map(|&i| bid(i, j)).fold(f64::NEG_INFINITY, f64::max);
        if top.is_finite() {
            let scale = top.abs().max(1.0);
            price = price.max((outcome.prices[j] - top).abs() / scale);
            for &i in &part.buyers {
                if x[(i, j)] > DELTA_ACTIVE {
                    winner = winner.max((outcome.prices[j] - bid(i, j)) / scale);
                }
            }
        }
        for i in 0..n {
            if !part.is_buyer[i] && x[(i, j)] > DELTA_ACTIVE {
                winner = winner.max(x[(i, j)]);
            }
        }
    }

    let mut clearing = 0.0_f64;
    for &j in &part.items {
        clearing = clearing.max((x.col_sum(j) - 1.0).abs());
    }
    for v in x.iter() {
        clearing = clearing.max(-v);
    }

    // Spend is a sum of price-minus-boost differences; rounding in those
    // differences is forgiven so that a tiny budget next to a holding won at
    // the boost alone is still judged on what it actually pays.
    let mut budget = 0.0_f64;
    for &i in &part.buyers {
        let spend: f64 = (0..m).map(|j| (outcome.prices[j] - boost(i, j)) * x[(i, j)]).sum();
        let noise: f64 = (0..m)
            .map(|j| 4.0 * f64::EPSILON * outcome.prices[j].abs().max(boost(i, j).abs()) * x[(i, j)].abs())
            .sum();
        budget = budget.max(((spend - budgets[i]).abs() - noise).max(0.0) / budgets[i]);
    }

    let mut report = PacingReport {
        price_consistency: price,
        winner_maximality: winner.max(0.0),
        market_clearing: clearing,
        budget_depletion: budget,
        tol,
        pass: false,
    };
    let finite = [&outcome.alphas, &outcome.prices]
        .iter()
        .all(|v| v.iter().all(|a| a.is_finite()))
        && x.iter().all(|a| a.is_finite());
    if !finite {
        report.price_consistency = f64::INFINITY;
    }
    report.pass = report.max_residual() <= tol;
    report
}
