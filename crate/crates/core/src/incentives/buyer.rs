use serde::Serialize;

use crate::equilibrium::{SolverOptions, SubmarketSolver};
use crate::error::{Error, Result};
use crate::market::{BudgetSplit, ValidatedMarket};

/// Worst-case factor between a best budget split and the equalized split.
pub const BUYER_BOUND: f64 = 2.0;

/// Utility of the second buyer in the two-buyer, two-item sub-market with
/// values `[[2, 1], [1, 2]]` and first budget 2, as a function of the second
/// buyer's budget `b`. Non-concave: flat on `[1, 4]`.
pub fn crossed_pair_utility(b: f64) -> f64 {
    if b <= 1.0 {
        6.0 * b / (b + 2.0)
    } else if b <= 4.0 {
        2.0
    } else {
        3.0 - 6.0 / (b + 2.0)
    }
}

/// A buyer split whose bang-per-buck `u_i(k)/B_i(k)` is (nearly) the same at
/// every seller it pays.
#[derive(Debug, Clone, Serialize)]
pub struct EqualizedSplit {
    pub split: Vec<f64>,
    pub utilities: Vec<f64>,
    pub utility: f64,
    /// max − min bang-per-buck over sellers with positive budget.
    pub spread: f64,
    pub iterations: usize,
}

/// Share of its budget below which a buyer is considered to have left a seller.
const ABANDON: f64 = 1e-13;

/// Iterates the buyer's proportional update `B_i(k) ← B_i u_i(k)/u_i(K)` with
/// every other row of `others` held fixed, until the bang-per-buck spread
/// drops below `tol`. The buyer's own row in `others` is ignored.
pub fn buyer_equalized_split(
    market: &ValidatedMarket,
    buyer: usize,
    others: &BudgetSplit,
    tol: f64,
) -> Result<EqualizedSplit> {
    check_inputs(market, buyer, others)?;
    let sellers = market.valued_sellers(buyer).to_vec();
    if sellers.is_empty() {
        return Err(Error::BuyerValuesNothing { buyer });
    }
    let budget = market.budget(buyer);
    let k = market.num_sellers();
    let mut solver = SubmarketSolver::new(market, None, SolverOptions::default());
    let mut split = vec![0.0; k];
    for &s in &sellers {
        split[s] = budget / sellers.len() as f64;
    }
    // Proportional updates converge slowly near ties between sellers; the
    // bisected split then restarts them close to the fixed point.
    const PROPORTIONAL_ITERATIONS: usize = 2_000;
    let mut spread = f64::INFINITY;
    let mut iterations = 0;
    for phase in 0..2 {
        if phase == 1 {
            split = bisect_common_rate(&mut solver, others, buyer, &sellers, budget)?;
        }
        for _ in 0..PROPORTIONAL_ITERATIONS {
            let utilities = seller_utilities(&mut solver, others, buyer, &sellers, &split)?;
            spread = bang_spread(&sellers, &split, &utilities);
            let total: f64 = utilities.iter().sum();
            if spread < tol {
                return Ok(EqualizedSplit {
                    split,
                    utilities,
                    utility: total,
                    spread,
                    iterations,
                });
            }
            iterations += 1;
            for &s in &sellers {
                split[s] = budget * utilities[s] / total;
                if split[s] < ABANDON * budget {
                    split[s] = 0.0;
                }
            }
            let kept: f64 = split.iter().sum();
            split.iter_mut().for_each(|b| *b *= budget / kept);
        }
    }
    Err(Error::NoConvergence {
        iterations,
        residual: spread,
    })
}

fn seller_utilities(
    solver: &mut SubmarketSolver,
    others: &BudgetSplit,
    buyer: usize,
    sellers: &[usize],
    split: &[f64],
) -> Result<Vec<f64>> {
    let mut utilities = vec![0.0; split.len()];
    for &s in sellers {
        if split[s] > 0.0 {
            utilities[s] = solver.utility_at(others, buyer, s, split[s])?;
        }
    }
    Ok(utilities)
}

/// max − min of `u(k) / B(k)` over sellers with positive budget.
fn bang_spread(sellers: &[usize], split: &[f64], utilities: &[f64]) -> f64 {
    let (lo, hi) = sellers
        .iter()
        .filter(|&&s| split[s] > 0.0)
        .map(|&s| utilities[s] / split[s])
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    hi - lo
}

/// Split equalizing bang-per-buck, found by bisection on the common rate.
/// Utility is concave in the buyer's own budget, so each seller's rate
/// `u(k)/B(k)` is non-increasing and the budget it absorbs at a given rate
/// is non-increasing in that rate.
fn bisect_common_rate(
    solver: &mut SubmarketSolver,
    others: &BudgetSplit,
    buyer: usize,
    sellers: &[usize],
    budget: f64,
) -> Result<Vec<f64>> {
    const STEPS: usize = 64;
    let k = others.shape().1;
    let floor = ABANDON * budget;
    let rate = |solver: &mut SubmarketSolver, s: usize, b: f64| -> Result<f64> {
        Ok(solver.utility_at(others, buyer, s, b)? / b)
    };
    let mut top = vec![0.0; k];
    let mut bottom = vec![0.0; k];
    for &s in sellers {
        top[s] = rate(solver, s, floor)?;
        bottom[s] = rate(solver, s, budget)?;
    }
    // Budget seller `s` absorbs at common rate `lambda`.
    let absorbed = |solver: &mut SubmarketSolver, s: usize, lambda: f64| -> Result<f64> {
        if top[s] <= lambda {
            return Ok(0.0);
        }
        if bottom[s] >= lambda {
            return Ok(budget);
        }
        let (mut lo, mut hi) = (floor, budget);
        for _ in 0..STEPS {
            let mid = 0.5 * (lo + hi);
            if rate(solver, s, mid)? >= lambda {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let mut lo = sellers.iter().map(|&s| bottom[s]).fold(f64::INFINITY, f64::min);
    let mut hi = sellers.iter().map(|&s| top[s]).fold(0.0, f64::max);
    // Invariant: the sellers absorb at least the budget at rate `lo`. Ties
    // move `lo` up so a seller capped at the whole budget does not pull
    // the others in.
    let mut split = vec![0.0; k];
    for _ in 0..STEPS {
        let lambda = 0.5 * (lo + hi);
        let mut total = 0.0;
        for &s in sellers {
            total += absorbed(solver, s, lambda)?;
        }
        if total >= budget {
            lo = lambda;
        } else {
            hi = lambda;
        }
    }
    for &s in sellers {
        split[s] = absorbed(solver, s, lo)?;
    }
    let total: f64 = split.iter().sum();
    split.iter_mut().for_each(|b| *b *= budget / total);
    Ok(split)
}

/// Best split found on the budget grid.
#[derive(Debug, Clone, Serialize)]
pub struct GridResponse {
    pub split: Vec<f64>,
    pub utility: f64,
    /// Bound on how much utility the grid can miss: the sum over sellers of
    /// the largest utility gain across one grid step.
    pub slack: f64,
}

/// Largest number of sellers the grid search accepts.
const GRID_MAX_SELLERS: usize = 3;

/// Exhaustive search over splits `B_i · s / resolution`, opponents fixed.
///
/// Each seller's utility is tabulated once per budget level, so the cost is
/// `K · (resolution + 1)` sub-market solves plus the enumeration.
pub fn buyer_best_response_grid(
    market: &ValidatedMarket,
    buyer: usize,
    others: &BudgetSplit,
    resolution: usize,
) -> Result<GridResponse> {
    check_inputs(market, buyer, others)?;
    if market.num_sellers() > GRID_MAX_SELLERS {
        return Err(Error::TooLarge(format!(
            "grid best response supports at most {GRID_MAX_SELLERS} sellers, market has {}",
            market.num_sellers()
        )));
    }
    if resolution < 10 {
        return Err(Error::Domain("grid resolution must be at least 10".into()));
    }
    let sellers = market.valued_sellers(buyer).to_vec();
    if sellers.is_empty() {
        return Err(Error::BuyerValuesNothing { buyer });
    }
    let budget = market.budget(buyer);
    let step = budget / resolution as f64;
    let mut solver = SubmarketSolver::new(market, None, SolverOptions::default());
    let mut ladders = Vec::with_capacity(sellers.len());
    for &s in &sellers {
        let mut ladder = Vec::with_capacity(resolution + 1);
        for level in 0..=resolution {
            let u = if level == 0 {
                0.0
            } else {
                solver.utility_at(others, buyer, s, step * level as f64)?
            };
            ladder.push(u);
        }
        ladders.push(ladder);
    }
    let slack = ladders
        .iter()
        .map(|l| l.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max))
        .sum();

    let mut best = (f64::NEG_INFINITY, vec![0usize; sellers.len()]);
    let mut levels = vec![0usize; sellers.len()];
    enumerate(&ladders, resolution, 0, 0.0, &mut levels, &mut best);
    let mut split = vec![0.0; market.num_sellers()];
    for (c, &s) in sellers.iter().enumerate() {
        split[s] = step * best.1[c] as f64;
    }
    Ok(GridResponse {
        split,
        utility: best.0,
        slack,
    })
}

fn enumerate(
    ladders: &[Vec<f64>],
    left: usize,
    pos: usize,
    acc: f64,
    levels: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    if pos + 1 == ladders.len() {
        levels[pos] = left;
        let total = acc + ladders[pos][left];
        if total > best.0 {
            best.0 = total;
            best.1.clone_from(levels);
        }
        return;
    }
    for q in 0..=left {
        levels[pos] = q;
        enumerate(ladders, left - q, pos + 1, acc + ladders[pos][q], levels, best);
    }
}

/// Exact best response when every seller owns a single item: maximizes
/// `Σ_k v_k b_k / (b_k + o_k)` over the budget simplex, `o_k` being the money
/// the other buyers send to seller `k`. The optimum has the water-filling form
/// `b_k = max(0, sqrt(v_k o_k / λ) − o_k)`; `λ` is found by bisection.
pub fn buyer_best_response_one_item(market: &ValidatedMarket, buyer: usize, others: &BudgetSplit) -> Result<Vec<f64>> {
    check_inputs(market, buyer, others)?;
    let k = market.num_sellers();
    if (0..k).any(|s| market.items_of(s).len() != 1) {
        return Err(Error::Domain("every seller must own exactly one item".into()));
    }
    let budget = market.budget(buyer);
    let value: Vec<f64> = (0..k).map(|s| market.values()[(buyer, market.items_of(s)[0])]).collect();
    let opp: Vec<f64> = (0..k)
        .map(|s| (0..market.num_buyers()).filter(|&i| i != buyer).map(|i| others[(i, s)]).sum())
        .collect();
    let active: Vec<usize> = (0..k).filter(|&s| value[s] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::BuyerValuesNothing { buyer });
    }
    if let Some(&s) = active.iter().find(|&&s| opp[s] <= 0.0) {
        return Err(Error::Domain(format!(
            "seller {s} has no competing money; the buyer's supremum is not attained"
        )));
    }
    let spend = |lambda: f64| -> Vec<f64> {
        let mut b = vec![0.0; k];
        for &s in &active {
            b[s] = ((value[s] * opp[s] / lambda).sqrt() - opp[s]).max(0.0);
        }
        b
    };
    // marginal utility at b = 0 is v/o; no seller is funded above the largest
    let mut hi = active.iter().map(|&s| value[s] / opp[s]).fold(0.0, f64::max);
    let mut lo = hi;
    while spend(lo).iter().sum::<f64>() < budget {
        lo *= 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spend(mid).iter().sum::<f64>() > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    let mut b = spend(0.5 * (lo + hi));
    let total: f64 = b.iter().sum();
    b.iter_mut().for_each(|x| *x *= budget / total);
    Ok(b)
}

/// Outcome of auditing one buyer against the equalized-split guarantee.
#[derive(Debug, Clone, Serialize)]
pub struct BuyerDeviationReport {
    pub buyer: usize,
    pub equalized: EqualizedSplit,
    /// Best of the grid optimum and the equalized split itself.
    pub best_split: Vec<f64>,
    pub best_utility: f64,
    pub slack: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compares the buyer's equalized split against its grid best response, with
/// everyone else's money fixed at `others`.
pub fn buyer_deviation_report(
    market: &ValidatedMarket,
    buyer: usize,
    others: &BudgetSplit,
    resolution: usize,
    tol: f64,
) -> Result<BuyerDeviationReport> {
    let equalized = buyer_equalized_split(market, buyer, others, tol)?;
    let grid = buyer_best_response_grid(market, buyer, others, resolution)?;
    let (best_split, best_utility) = if grid.utility > equalized.utility {
        (grid.split, grid.utility)
    } else {
        (equalized.split.clone(), equalized.utility)
    };
    let ratio = best_utility / equalized.utility;
    let pass = best_utility <= BUYER_BOUND * equalized.utility + grid.slack && ratio >= 1.0 - 1e-6;
    Ok(BuyerDeviationReport {
        buyer,
        equalized,
        best_split,
        best_utility,
        slack: grid.slack,
        ratio,
        bound: BUYER_BOUND,
        pass,
    })
}

fn check_inputs(market: &ValidatedMarket, buyer: usize, others: &BudgetSplit) -> Result<()> {
    if buyer >= market.num_buyers() {
        return Err(Error::Domain(format!("buyer {buyer} does not exist")));
    }
    if others.shape() != (market.num_buyers(), market.num_sellers()) {
        return Err(Error::ShapeMismatch(format!(
            "split is {:?}, market has {} buyers and {} sellers",
            others.shape(),
            market.num_buyers(),
            market.num_sellers()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    /// Two copies of the crossed pair, one per seller; buyer 0 has 2 at each.
    fn doubled(b1: f64) -> (ValidatedMarket, BudgetSplit) {
        let m = ValidatedMarket::from_parts(
            vec![4.0, b1],
            vec![vec![2.0, 1.0, 2.0, 1.0], vec![1.0, 2.0, 1.0, 2.0]],
            vec![0, 0, 1, 1],
        );
        let split = BudgetSplit(Matrix::from_nested(&[[2.0, 2.0], [b1 / 2.0, b1 / 2.0]]));
        (m, split)
    }

    #[test]
    fn curve_values() {
        assert_eq!(crossed_pair_utility(1.0), 2.0);
        assert_eq!(crossed_pair_utility(4.0), 2.0);
        assert!((crossed_pair_utility(0.5) - 1.2).abs() < 1e-15);
        assert!((crossed_pair_utility(10.0) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn grid_finds_symmetric_optimum() {
        let (m, split) = doubled(2.0);
        let g = buyer_best_response_grid(&m, 1, &split, 200).unwrap();
        assert!((g.utility - 4.0).abs() < 1e-9, "{g:?}");
        let e = buyer_equalized_split(&m, 1, &split, 1e-9).unwrap();
        assert!((e.split[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_seller_gets_everything() {
        let m = ValidatedMarket::from_parts(vec![1.0, 1.0], vec![vec![1.0, 0.0], vec![1.0, 1.0]], vec![0, 1]);
        let split = BudgetSplit(Matrix::from_nested(&[[1.0, 0.0], [0.5, 0.5]]));
        let e = buyer_equalized_split(&m, 0, &split, 1e-9).unwrap();
        assert_eq!(e.split, vec![1.0, 0.0]);
        assert_eq!(e.spread, 0.0);
        let g = buyer_best_response_grid(&m, 0, &split, 20).unwrap();
        assert_eq!(g.split, vec![1.0, 0.0]);
    }

    #[test]
    fn one_item_water_filling() {
        let m = ValidatedMarket::from_parts(vec![2.0, 2.0], vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![0, 1]);
        let others = BudgetSplit(Matrix::from_nested(&[[0.0, 0.0], [1.0, 1.0]]));
        let b = buyer_best_response_one_item(&m, 0, &others).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 1.0).abs() < 1e-12);

        let m = ValidatedMarket::from_parts(vec![1.0, 2.0], vec![vec![4.0, 1.0], vec![1.0, 1.0]], vec![0, 1]);
        let b = buyer_best_response_one_item(&m, 0, &others).unwrap();
        let f = |x: f64| 4.0 * x / (x + 1.0) + (1.0 - x) / (2.0 - x);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let (a, c) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if f(a) < f(c) {
                lo = a;
            } else {
                hi = c;
            }
        }
        assert!((b[0] - lo).abs() < 1e-6, "{b:?} vs {lo}");
    }
}
