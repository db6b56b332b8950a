use super::eg_objective;
use crate::error::{Error, Result};
use crate::market::ValidatedMarket;
use crate::matrix::Matrix;

/// Largest `n·m` accepted by [`grid_search_eg`].
pub const GRID_MAX_CELLS: usize = 6;

/// Best allocation found on the simplex grid.
#[derive(Debug, Clone)]
pub struct GridOptimum {
    pub allocation: Matrix,
    pub utilities: Vec<f64>,
    pub objective: f64,
}

/// Exhaustive EG maximization over allocations whose entries are multiples of
/// `1/resolution`. Grid points leaving some buyer with zero utility are skipped.
pub fn grid_search_eg(market: &ValidatedMarket, resolution: usize) -> Result<GridOptimum> {
    let (n, m) = (market.num_buyers(), market.num_items());
    if n * m > GRID_MAX_CELLS {
        return Err(Error::TooLarge(format!("grid search needs n*m <= {GRID_MAX_CELLS}, got {}", n * m)));
    }
    if resolution == 0 {
        return Err(Error::Domain("resolution must be positive".into()));
    }
    let compositions = compositions(resolution, n);
    let mut search = Search {
        values: market.values(),
        budgets: market.budgets(),
        compositions: &compositions,
        r: resolution as f64,
        choice: vec![0; m],
        best: f64::NEG_INFINITY,
        best_choice: vec![0; m],
    };
    search.descend(0, &mut vec![0.0; n]);
    if !search.best.is_finite() {
        return Err(Error::Domain("no grid point gives every buyer positive utility".into()));
    }
    let mut allocation = Matrix::zeros(n, m);
    for (j, &c) in search.best_choice.iter().enumerate() {
        for i in 0..n {
            allocation[(i, j)] = compositions[c][i] as f64 / resolution as f64;
        }
    }
    let utilities: Vec<f64> = (0..n)
        .map(|i| (0..m).map(|j| market.values()[(i, j)] * allocation[(i, j)]).sum())
        .collect();
    let objective = eg_objective(market.budgets(), &utilities)?;
    Ok(GridOptimum {
        allocation,
        utilities,
        objective,
    })
}

/// Upper bound on `EG(optimum) − EG(grid optimum)`: flooring an optimal
/// allocation to the grid costs buyer `i` at most `Σ_j v_ij / r` utility.
/// Infinite when some optimal utility is below that loss.
pub fn grid_discretization_bound(market: &ValidatedMarket, optimal_utilities: &[f64], resolution: usize) -> f64 {
    let r = resolution as f64;
    let mut bound = 0.0;
    for (i, &u) in optimal_utilities.iter().enumerate() {
        let loss = market.values().row(i).iter().sum::<f64>() / r;
        if u <= loss {
            return f64::INFINITY;
        }
        bound += market.budget(i) * (u / (u - loss)).ln();
    }
    bound
}

struct Search<'a> {
    values: &'a Matrix,
    budgets: &'a [f64],
    compositions: &'a [Vec<usize>],
    r: f64,
    choice: Vec<usize>,
    best: f64,
    best_choice: Vec<usize>,
}

impl Search<'_> {
    fn descend(&mut self, item: usize, utilities: &mut Vec<f64>) {
        if item == self.choice.len() {
            let mut obj = 0.0;
            for (b, u) in self.budgets.iter().zip(utilities.iter()) {
                if *u <= 0.0 {
                    return;
                }
                obj += b * u.ln();
            }
            if obj > self.best {
                self.best = obj;
                self.best_choice.clone_from(&self.choice);
            }
            return;
        }
        for (c, comp) in self.compositions.iter().enumerate() {
            self.choice[item] = c;
            for (i, &q) in comp.iter().enumerate() {
                utilities[i] += self.values[(i, item)] * q as f64 / self.r;
            }
            self.descend(item + 1, utilities);
            for (i, &q) in comp.iter().enumerate() {
                utilities[i] -= self.values[(i, item)] * q as f64 / self.r;
            }
        }
    }
}

/// All ways to write `total` as an ordered sum of `parts` non-negative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for q in 0..=left {
            prefix.push(q);
            rec(left - q, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_count() {
        assert_eq!(compositions(4, 3).len(), 15);
        assert!(compositions(4, 3).iter().all(|c| c.iter().sum::<usize>() == 4));
    }

    #[test]
    fn lone_buyer_gets_all() {
        let m = ValidatedMarket::from_parts(vec![1.5], vec![vec![0.3, 2.0, 1.0]], vec![0, 1, 1]);
        let g = grid_search_eg(&m, 7).unwrap();
        assert!(g.allocation.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn guard() {
        let m = ValidatedMarket::from_parts(vec![1.0; 3], vec![vec![1.0; 4]; 3], vec![0, 0, 1, 1]);
        assert!(matches!(grid_search_eg(&m, 10), Err(Error::TooLarge(_))));
    }

    #[test]
    fn symmetric_pair() {
        let m = ValidatedMarket::from_parts(vec![1.0, 1.0], vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![0, 1]);
        let g = grid_search_eg(&m, 100).unwrap();
        assert!((g.objective - 2.0 * 2f64.ln()).abs() < 1e-12);
    }
}
