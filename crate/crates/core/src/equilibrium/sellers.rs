use super::{solve_submarket_boosted_from, solve_submarket_from, InnerStart, PacingOutcome, SolverOptions};
use crate::error::Result;
use crate::market::{BudgetSplit, UtilityMatrix, ValidatedMarket};
use crate::matrix::Matrix;

/// Budget share given to buyers absent from a boosted sub-market.
const PHANTOM: f64 = 1e-15;

/// Repeatedly solves the sellers' sub-markets of one market, warm-starting
/// each seller from its previous outcome.
#[derive(Debug, Clone)]
pub struct SubmarketSolver {
    values: Vec<Matrix>,
    boosts: Option<Vec<Matrix>>,
    full_boosts: Option<Matrix>,
    opts: SolverOptions,
    last: Vec<Option<PacingOutcome>>,
}

impl SubmarketSolver {
    pub fn new(market: &ValidatedMarket, boosts: Option<&Matrix>, opts: SolverOptions) -> Self {
        let k = market.num_sellers();
        Self {
            values: (0..k).map(|s| market.seller_values(s)).collect(),
            boosts: boosts.map(|c| (0..k).map(|s| market.seller_boosts(c, s)).collect()),
            full_boosts: boosts.cloned(),
            opts,
            last: vec![None; k],
        }
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    /// Pacing equilibrium of `seller`'s items with the given per-buyer budgets.
    pub fn solve(&mut self, seller: usize, budgets: &[f64]) -> Result<PacingOutcome> {
        let values = &self.values[seller];
        let warm = self.last[seller].as_ref();
        let out = match &self.boosts {
            Some(c) => {
                // A buyer spending nothing here still bids its boosts, and may
                // win an item it does not value at no cost. A phantom budget far
                // below the dust threshold keeps it in the sub-market.
                let total: f64 = budgets.iter().sum();
                let phantom = PHANTOM * total;
                let lifted: Vec<f64> = budgets.iter().map(|&b| if b > phantom { b } else { phantom }).collect();
                solve_submarket_boosted_from(values, &lifted, &c[seller], &self.opts, warm)?
            }
            None => {
                let start = warm.map_or(InnerStart::default(), InnerStart::Warm);
                solve_submarket_from(values, budgets, &self.opts, start)?
            }
        };
        self.last[seller] = Some(out.clone());
        Ok(out)
    }

    /// Utility buyer `buyer` gets from `seller` when spending `amount` there,
    /// all other budgets taken from `split`.
    pub fn utility_at(&mut self, split: &BudgetSplit, buyer: usize, seller: usize, amount: f64) -> Result<f64> {
        let mut budgets = split.seller_budgets(seller);
        budgets[buyer] = amount;
        Ok(self.solve(seller, &budgets)?.utilities[buyer])
    }

    /// Per-seller utilities `u_i(k)` under a budget split.
    pub fn utilities(&mut self, split: &BudgetSplit) -> Result<UtilityMatrix> {
        let (n, k) = split.shape();
        let mut u = Matrix::zeros(n, k);
        for s in 0..k {
            let out = self.solve(s, &split.seller_budgets(s))?;
            for i in 0..n {
                u[(i, s)] = out.utilities[i];
            }
        }
        Ok(UtilityMatrix(u))
    }

    /// Whole-market outcome assembled from every sub-market at `split`, each
    /// buyer paced at `α_i = B_i / u_i(K)`. At a fixed point of the dynamics
    /// this is a market-wide pacing equilibrium.
    pub fn market_outcome(&mut self, market: &ValidatedMarket, split: &BudgetSplit) -> Result<PacingOutcome> {
        let (n, m) = (market.num_buyers(), market.num_items());
        let mut allocation = Matrix::zeros(n, m);
        for s in 0..market.num_sellers() {
            let out = self.solve(s, &split.seller_budgets(s))?;
            for (c, &j) in market.items_of(s).iter().enumerate() {
                for i in 0..n {
                    allocation[(i, j)] = out.allocation[(i, c)];
                }
            }
        }
        let alphas = (0..n)
            .map(|i| {
                let u: f64 = (0..m).map(|j| market.values()[(i, j)] * allocation[(i, j)]).sum();
                if u > 0.0 { market.budget(i) / u } else { 0.0 }
            })
            .collect();
        Ok(PacingOutcome::from_parts(market.values(), self.full_boosts.as_ref(), alphas, allocation))
    }
}
