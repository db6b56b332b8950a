use super::{solve_submarket, solve_submarket_boosted, BoostMatrix, PacingOutcome, SolverOptions};
use crate::error::Result;
use crate::market::{BudgetSplit, UtilityMatrix, ValidatedMarket};
use crate::matrix::Matrix;

/// A market-wide equilibrium together with its per-seller decomposition.
#[derive(Debug, Clone)]
pub struct MarketEquilibrium {
    /// Equilibrium of the whole market viewed as one Fisher market.
    pub outcome: PacingOutcome,
    /// `u[(i, k)]`: value buyer `i` receives from seller `k`'s items.
    pub utilities: UtilityMatrix,
    /// `B_i(k,*)`: money buyer `i` pays seller `k`.
    pub split: BudgetSplit,
}

impl MarketEquilibrium {
    fn decompose(market: &ValidatedMarket, boosts: Option<&BoostMatrix>, outcome: PacingOutcome) -> Self {
        let (n, k) = (market.num_buyers(), market.num_sellers());
        let mut utilities = Matrix::zeros(n, k);
        let mut split = Matrix::zeros(n, k);
        for s in 0..k {
            for &j in market.items_of(s) {
                for i in 0..n {
                    let x = outcome.allocation[(i, j)];
                    let c = boosts.map_or(0.0, |c| c[(i, j)]);
                    utilities[(i, s)] += market.values()[(i, j)] * x;
                    split[(i, s)] += (outcome.prices[j] - c) * x;
                }
            }
        }
        Self {
            outcome,
            utilities: UtilityMatrix(utilities),
            split: BudgetSplit(split),
        }
    }

    pub fn prices(&self) -> &[f64] {
        &self.outcome.prices
    }

    pub fn allocation(&self) -> &Matrix {
        &self.outcome.allocation
    }

    /// u_i(K,*) per buyer.
    pub fn totals(&self) -> Vec<f64> {
        self.outcome.utilities.clone()
    }

    /// Δ: the largest fraction of any buyer's budget paid to a single seller.
    pub fn max_budget_share(&self, budgets: &[f64]) -> f64 {
        let mut delta: f64 = 0.0;
        for (i, b) in budgets.iter().enumerate() {
            for k in 0..self.split.cols() {
                delta = delta.max(self.split[(i, k)] / b);
            }
        }
        delta
    }
}

/// Competitive equilibrium of the whole market, with the induced budget split
/// `B_i(k,*) = Σ_{j∈J_k} p_j x_ij`.
pub fn solve_market_ce(market: &ValidatedMarket, opts: &SolverOptions) -> Result<MarketEquilibrium> {
    let outcome = solve_submarket(market.values(), market.budgets(), opts)?;
    Ok(MarketEquilibrium::decompose(market, None, outcome))
}

/// Market-wide pacing equilibrium with additive boosts. The split records
/// actual payments `Σ_{j∈J_k} (p_j − c_ij) x_ij`.
pub fn solve_market_boosted(
    market: &ValidatedMarket,
    boosts: &BoostMatrix,
    opts: &SolverOptions,
) -> Result<MarketEquilibrium> {
    market.check_boosts(boosts)?;
    let outcome = solve_submarket_boosted(market.values(), market.budgets(), boosts, opts)?;
    Ok(MarketEquilibrium::decompose(market, Some(boosts), outcome))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossed_single_item_sellers() {
        let m = ValidatedMarket::from_parts(vec![1.0, 1.0], vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![0, 1]);
        let ce = solve_market_ce(&m, &SolverOptions::default()).unwrap();
        assert!((ce.prices()[0] - 1.0).abs() < 1e-9 && (ce.prices()[1] - 1.0).abs() < 1e-9);
        assert!((ce.allocation()[(0, 0)] - 1.0).abs() < 1e-9);
        assert!((ce.totals()[0] - 2.0).abs() < 1e-9 && (ce.totals()[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn identical_buyers_share_everything() {
        let m = ValidatedMarket::from_parts(vec![1.0, 1.0], vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![0, 1]);
        let ce = solve_market_ce(&m, &SolverOptions::default()).unwrap();
        for i in 0..2 {
            assert!((ce.totals()[i] - 1.0).abs() < 1e-9);
            for k in 0..2 {
                assert!((ce.split[(i, k)] - 0.5).abs() < 1e-9, "{:?}", ce.split);
            }
        }
        assert!((ce.max_budget_share(&[1.0, 1.0]) - 0.5).abs() < 1e-9);
    }
}
