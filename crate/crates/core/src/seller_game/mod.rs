//! The seller competition game: every seller picks an allocation of its own
//! items, buyers split budgets in proportion to the utility each seller
//! delivers, and each seller earns the budget shares it attracts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equilibrium::{nsw, solve_market_ce, SolverOptions};
use crate::error::{Error, Result};
use crate::incentives::{default_epsilon, revenue, revenue_best_response, BestResponseOptions, SellerBestResponse};
use crate::market::{UtilityMatrix, ValidatedMarket};
use crate::matrix::Matrix;

/// Per-buyer, per-seller utilities with one witness allocation per seller.
#[derive(Debug, Clone)]
pub struct UtilityProfile {
    pub utilities: UtilityMatrix,
    /// `witnesses[k]` allocates seller `k`'s items (columns in seller order)
    /// and delivers column `k` of `utilities`.
    pub witnesses: Vec<Matrix>,
}

impl UtilityProfile {
    /// Builds a profile from per-seller allocations.
    pub fn from_allocations(market: &ValidatedMarket, witnesses: Vec<Matrix>) -> Result<Self> {
        let (n, k) = (market.num_buyers(), market.num_sellers());
        if witnesses.len() != k {
            return Err(Error::ShapeMismatch(format!("{} allocations for {k} sellers", witnesses.len())));
        }
        let mut u = Matrix::zeros(n, k);
        for (s, x) in witnesses.iter().enumerate() {
            let v = market.seller_values(s);
            if x.shape() != v.shape() {
                return Err(Error::ShapeMismatch(format!(
                    "allocation of seller {s} is {:?}, expected {:?}",
                    x.shape(),
                    v.shape()
                )));
            }
            for j in 0..x.cols() {
                if (x.col_sum(j) - 1.0).abs() > 1e-9 || x.column(j).any(|a| a < 0.0) {
                    return Err(Error::Domain(format!("allocation of seller {s} is infeasible at item {j}")));
                }
            }
            for i in 0..n {
                u[(i, s)] = (0..x.cols()).map(|j| v[(i, j)] * x[(i, j)]).sum();
            }
        }
        Ok(Self {
            utilities: UtilityMatrix(u),
            witnesses,
        })
    }

    /// Every item of every seller split evenly among the buyers valuing it.
    pub fn uniform(market: &ValidatedMarket) -> Self {
        Self::weighted(market, |_, _| 1.0)
    }

    /// Random positive shares among the buyers valuing each item.
    pub fn random(market: &ValidatedMarket, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::weighted(market, move |_, _| 0.05 + rng.random::<f64>())
    }

    fn weighted(market: &ValidatedMarket, mut weight: impl FnMut(usize, usize) -> f64) -> Self {
        let witnesses = (0..market.num_sellers())
            .map(|s| {
                let v = market.seller_values(s);
                let mut x = Matrix::zeros(v.rows(), v.cols());
                for j in 0..v.cols() {
                    for i in 0..v.rows() {
                        if v[(i, j)] > 0.0 {
                            x[(i, j)] = weight(i, j);
                        }
                    }
                    let total = x.col_sum(j);
                    for i in 0..v.rows() {
                        x[(i, j)] /= total;
                    }
                }
                x
            })
            .collect();
        Self::from_allocations(market, witnesses).expect("shares are feasible by construction")
    }

    /// What buyer `i` gets from all sellers except `seller`.
    pub fn opponents(&self, seller: usize) -> Vec<f64> {
        (0..self.utilities.rows())
            .map(|i| self.utilities.row_sum(i) - self.utilities[(i, seller)])
            .collect()
    }

    fn check_floor(&self, floor: f64) -> Result<()> {
        for k in 0..self.utilities.cols() {
            for (i, w) in self.opponents(k).into_iter().enumerate() {
                if !(w >= floor) {
                    return Err(Error::EpsilonFloorViolated {
                        buyer: i,
                        seller: k,
                        value: w,
                        floor,
                    });
                }
            }
        }
        Ok(())
    }
}

/// `R_k = Σ_i B_i u_i(k) / u_i(K)` for every seller.
pub fn revenue_profile(market: &ValidatedMarket, profile: &UtilityProfile) -> Result<Vec<f64>> {
    profile.check_floor(default_epsilon(market))?;
    Ok(revenues(market, &profile.utilities))
}

fn revenues(market: &ValidatedMarket, u: &Matrix) -> Vec<f64> {
    let totals: Vec<f64> = (0..u.rows()).map(|i| u.row_sum(i)).collect();
    (0..u.cols())
        .map(|k| (0..u.rows()).map(|i| market.budget(i) * u[(i, k)] / totals[i]).sum())
        .collect()
}

/// Controls for [`solve_pne`].
#[derive(Debug, Clone, Copy)]
pub struct PneOptions {
    /// Best-response improvement below which a seller counts as settled;
    /// `None` means `1e-7 · B`.
    pub tol: Option<f64>,
    pub max_rounds: usize,
    pub best_response: BestResponseOptions,
}

impl Default for PneOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_rounds: 1_000,
            best_response: BestResponseOptions::default(),
        }
    }
}

impl PneOptions {
    pub fn tolerance(&self, market: &ValidatedMarket) -> f64 {
        self.tol.unwrap_or(1e-7 * market.total_budget())
    }
}

/// Where cyclic best response starts.
#[derive(Debug, Clone, Copy)]
pub enum PneStart {
    Uniform,
    Random(u64),
}

/// Result of [`solve_pne`].
#[derive(Debug, Clone)]
pub struct PneSolution {
    pub profile: UtilityProfile,
    /// Best-response improvement of every seller in the last round.
    pub improvements: Vec<f64>,
    pub revenues: Vec<f64>,
    pub rounds: usize,
}

/// Cyclic best response: each seller in turn replaces its allocation by a
/// revenue-maximizing one against the current profile, until no seller can
/// gain more than the tolerance and the profile has stopped moving.
///
/// When a full round fails to shrink the largest improvement, later moves
/// only go part of the way towards the best response.
pub fn solve_pne(market: &ValidatedMarket, opts: &PneOptions, start: PneStart) -> Result<PneSolution> {
    for i in 0..market.num_buyers() {
        if market.valued_sellers(i).len() < 2 {
            return Err(Error::Domain(format!(
                "buyer {i} values the items of fewer than two sellers"
            )));
        }
    }
    let tol = opts.tolerance(market);
    let floor = opts.best_response.epsilon.unwrap_or_else(|| default_epsilon(market));
    let mut profile = match start {
        PneStart::Uniform => UtilityProfile::uniform(market),
        PneStart::Random(seed) => UtilityProfile::random(market, seed),
    };
    let values: Vec<Matrix> = (0..market.num_sellers()).map(|s| market.seller_values(s)).collect();
    let mut damping = 1.0;
    let mut previous_worst = f64::INFINITY;
    let mut improvements = vec![f64::INFINITY; market.num_sellers()];

    for round in 1..=opts.max_rounds {
        let mut moved: f64 = 0.0;
        for k in 0..market.num_sellers() {
            let (br, current) = best_response_in(market, &values[k], &profile, k, floor, &opts.best_response);
            improvements[k] = br.revenue - current;
            let column = &mut profile.witnesses[k];
            for (x, b) in column.as_mut_slice().iter_mut().zip(br.allocation.as_slice()) {
                *x += damping * (b - *x);
            }
            for i in 0..market.num_buyers() {
                let u: f64 = (0..column.cols()).map(|j| values[k][(i, j)] * column[(i, j)]).sum();
                moved = moved.max((u - profile.utilities[(i, k)]).abs());
                profile.utilities[(i, k)] = u;
            }
        }
        let worst = improvements.iter().cloned().fold(0.0, f64::max);
        if worst < tol && moved < 0.1 * tol {
            let revenues = revenues(market, &profile.utilities);
            return Ok(PneSolution {
                profile,
                improvements,
                revenues,
                rounds: round,
            });
        }
        if worst >= previous_worst {
            damping = (damping * 0.5).max(0.05);
        }
        previous_worst = worst;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_rounds,
        residual: improvements.iter().cloned().fold(0.0, f64::max),
    })
}

/// Best response of seller `k` to `profile`, and the seller's revenue there.
fn best_response_in(
    market: &ValidatedMarket,
    values: &Matrix,
    profile: &UtilityProfile,
    k: usize,
    floor: f64,
    opts: &BestResponseOptions,
) -> (SellerBestResponse, f64) {
    let w: Vec<f64> = profile.opponents(k).into_iter().map(|w| w.max(floor)).collect();
    let current = revenue(market.budgets(), &profile.utilities.column(k).collect::<Vec<_>>(), &w);
    let br = revenue_best_response(values, market.budgets(), &w, opts, Some(&profile.witnesses[k]));
    (br, current)
}

/// Per-seller best-response improvements at a profile.
#[derive(Debug, Clone, Serialize)]
pub struct PneReport {
    pub improvements: Vec<f64>,
    pub revenues: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

/// Checks that no seller can raise its revenue by more than `tol`.
pub fn verify_pne(market: &ValidatedMarket, profile: &UtilityProfile, tol: f64) -> Result<PneReport> {
    let floor = default_epsilon(market);
    profile.check_floor(floor)?;
    let opts = BestResponseOptions::default();
    let improvements: Vec<f64> = (0..market.num_sellers())
        .map(|k| {
            let (br, current) = best_response_in(market, &market.seller_values(k), profile, k, floor, &opts);
            br.revenue - current
        })
        .collect();
    let pass = improvements.iter().all(|&d| d < tol);
    Ok(PneReport {
        improvements,
        revenues: revenues(market, &profile.utilities),
        tol,
        pass,
    })
}

/// Welfare at the seller-game equilibrium compared with the competitive
/// equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct FairnessReport {
    /// Largest fraction of any buyer's budget paid to a single seller at the
    /// competitive equilibrium.
    pub delta: f64,
    pub nsw_pne: f64,
    pub nsw_ce: f64,
    pub ratio: f64,
    /// `1 − delta`.
    pub bound: f64,
    pub pass: bool,
}

/// Nash social welfare of `pne` relative to the competitive equilibrium;
/// passes when the ratio lies in `[1 − Δ − tol, 1 + tol]`.
pub fn fairness(market: &ValidatedMarket, pne: &UtilityProfile, tol: f64) -> Result<FairnessReport> {
    let ce = solve_market_ce(market, &SolverOptions::default())?;
    let delta = ce.max_budget_share(market.budgets());
    let nsw_ce = nsw(market.budgets(), &ce.totals())?;
    let nsw_pne = nsw(market.budgets(), &pne.utilities.totals())?;
    let ratio = nsw_pne / nsw_ce;
    let bound = 1.0 - delta;
    Ok(FairnessReport {
        delta,
        nsw_pne,
        nsw_ce,
        ratio,
        bound,
        pass: ratio >= bound - tol && ratio <= 1.0 + tol,
    })
}

/// Seller-game equilibria from several starts, certified and compared with
/// the competitive equilibrium.
#[derive(Debug, Clone)]
pub struct PneAudit {
    /// Solution reached from the first start.
    pub solution: PneSolution,
    /// Largest utility difference between any start's solution and the first.
    pub spread: f64,
    pub verified: PneReport,
    pub fairness: FairnessReport,
    /// Improvement tolerance; starts agree when `spread ≤ 10 · tol`.
    pub tol: f64,
}

impl PneAudit {
    /// Starts agree and the first solution is certified.
    pub fn unique(&self) -> bool {
        self.spread <= 10.0 * self.tol && self.verified.pass
    }

    pub fn pass(&self) -> bool {
        self.unique() && self.fairness.pass
    }
}

/// Solves the seller game from every start, certifies the first solution and
/// measures its welfare. `fairness_tol` is the slack on the welfare bounds.
pub fn audit_pne(market: &ValidatedMarket, opts: &PneOptions, starts: &[PneStart], fairness_tol: f64) -> Result<PneAudit> {
    let Some((&first, rest)) = starts.split_first() else {
        return Err(Error::Domain("at least one start is required".into()));
    };
    let tol = opts.tolerance(market);
    let solution = solve_pne(market, opts, first)?;
    let mut spread: f64 = 0.0;
    for &start in rest {
        let other = solve_pne(market, opts, start)?;
        spread = spread.max(other.profile.utilities.max_abs_diff(&solution.profile.utilities));
    }
    let verified = verify_pne(market, &solution.profile, tol)?;
    let fairness = fairness(market, &solution.profile, fairness_tol)?;
    Ok(PneAudit {
        solution,
        spread,
        verified,
        fairness,
        tol,
    })
}

/// Saddle-point diagnostics of `f(u, w) = Σ_{i,k} B_i u_i(k) / (u_i(k) + Σ_{k'≠k} w_i(k'))`.
#[derive(Debug, Clone, Serialize)]
pub struct MinimaxReport {
    /// `f(u, u) − B` at the profile; zero up to rounding.
    pub diagonal: f64,
    /// `max_u f(u, profile) − B`, from per-seller best responses.
    pub best_response_gap: f64,
    /// Largest `f(u_s, profile) − B` over random feasible `u_s`.
    pub sampled_gap: f64,
    /// Largest of `|diagonal|` and the two gaps.
    pub max_violation: f64,
}

/// Evaluates how far `profile` is from the saddle value `B`.
pub fn minimax_residual(
    market: &ValidatedMarket,
    profile: &UtilityProfile,
    samples: usize,
    seed: u64,
) -> Result<MinimaxReport> {
    let floor = default_epsilon(market);
    profile.check_floor(floor)?;
    let total = market.total_budget();
    let f = |u: &Matrix| -> f64 {
        (0..u.cols())
            .map(|k| {
                let w: Vec<f64> = profile.opponents(k).into_iter().map(|w| w.max(floor)).collect();
                revenue(market.budgets(), &u.column(k).collect::<Vec<_>>(), &w)
            })
            .sum()
    };
    let diagonal = revenues(market, &profile.utilities).iter().sum::<f64>() - total;
    let opts = BestResponseOptions::default();
    let best: f64 = (0..market.num_sellers())
        .map(|k| best_response_in(market, &market.seller_values(k), profile, k, floor, &opts).0.revenue)
        .sum();
    let mut sampled_gap = f64::NEG_INFINITY;
    for s in 0..samples {
        let sample = UtilityProfile::random(market, seed.wrapping_add(s as u64));
        sampled_gap = sampled_gap.max(f(&sample.utilities) - total);
    }
    let best_response_gap = best - total;
    Ok(MinimaxReport {
        diagonal,
        best_response_gap,
        sampled_gap,
        max_violation: diagonal.abs().max(best_response_gap).max(sampled_gap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric() -> ValidatedMarket {
        ValidatedMarket::from_parts(vec![1.0, 1.0], vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![0, 1])
    }

    #[test]
    fn symmetric_revenues() {
        let m = symmetric();
        let p = UtilityProfile::uniform(&m);
        assert_eq!(revenue_profile(&m, &p).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn symmetric_equilibrium() {
        let m = symmetric();
        let sol = solve_pne(&m, &PneOptions::default(), PneStart::Random(3)).unwrap();
        for i in 0..2 {
            assert!((sol.profile.utilities.row_sum(i) - 1.0).abs() < 1e-6, "{:?}", sol.profile.utilities);
        }
        assert!((sol.revenues[0] - 1.0).abs() < 1e-6);
        let f = fairness(&m, &sol.profile, 1e-6).unwrap();
        assert!((f.delta - 0.5).abs() < 1e-9 && f.pass, "{f:?}");
        assert!(verify_pne(&m, &sol.profile, 1e-7).unwrap().pass);
    }

    #[test]
    fn diagonal_identity() {
        let m = ValidatedMarket::from_parts(
            vec![1.0, 0.5, 1.2],
            vec![vec![0.3, 0.9, 0.1], vec![0.8, 0.2, 0.5], vec![0.4, 0.4, 0.9]],
            vec![0, 1, 1],
        );
        let p = UtilityProfile::random(&m, 9);
        let r = minimax_residual(&m, &p, 10, 1).unwrap();
        assert!(r.diagonal.abs() < 1e-12);
        assert!(r.best_response_gap > 0.0);
    }
}
