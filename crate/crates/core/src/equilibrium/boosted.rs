//! Pacing equilibrium with additive boosts.
//!
//! The equilibrium allocation maximizes Σ_i B_i ln u_i(x) + Σ_ij c_ij x_ij over
//! the product of item simplices. A log-barrier interior-point method follows
//! the central path close to the optimum; the trading pairs it exposes are then
//! fed to a Newton solve of the square pacing system
//!
//!   α_i v_ij + c_ij = p_j      on trading pairs,
//!   Σ_i x_ij = 1               per item,
//!   α_i Σ_j v_ij x_ij = B_i    per buyer,
//!
//! with active-set corrections until every off-support bid is dominated.

use nalgebra::{DMatrix, DVector};

use super::{check_shapes, DUST, verify_pacing, BoostMatrix, PacingOutcome, Participants, SolverOptions};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Computes the first-price pacing equilibrium with additive boosts.
///
/// With all-zero boosts this is the plain pacing equilibrium, reached by an
/// independent route from [`super::solve_submarket`].
pub fn solve_submarket_boosted(
    values: &Matrix,
    budgets: &[f64],
    boosts: &BoostMatrix,
    opts: &SolverOptions,
) -> Result<PacingOutcome> {
    solve_submarket_boosted_from(values, budgets, boosts, opts, None)
}

pub(crate) fn solve_submarket_boosted_from(
    values: &Matrix,
    budgets: &[f64],
    boosts: &BoostMatrix,
    opts: &SolverOptions,
    warm: Option<&PacingOutcome>,
) -> Result<PacingOutcome> {
    check_shapes(values, budgets, Some(boosts))?;
    let (n, m) = values.shape();
    let part = Participants::of(values, budgets);
    if part.buyers.is_empty() {
        let mut out = PacingOutcome::from_parts(values, Some(boosts), vec![0.0; n], Matrix::zeros(n, m));
        out.prices = vec![0.0; m];
        return Ok(out);
    }
    let dust = dust_buyers(budgets, &part);
    if !dust.is_empty() {
        if let Some(out) = solve_without_dust(values, budgets, boosts, opts, warm, &part, &dust) {
            return Ok(out);
        }
        if let Some(out) = solve_lifted(values, budgets, boosts, opts, &dust) {
            return Ok(out);
        }
    }
    let problem = Problem::new(values, budgets, boosts, &part);

    if let Some(prev) = warm {
        if let Some(out) = problem.warm_polish(prev) {
            if verify_pacing(&out, values, budgets, Some(boosts), opts.tol).pass {
                return Ok(out);
            }
        }
    }

    let (x, newton_steps) = problem.interior_point(opts.max_inner);
    let approx = problem.outcome(&x);
    let support = problem.support(&x);
    if let Some(mut out) = problem.newton_polish(support, &approx.alphas, &approx.prices, &x) {
        out.iterations = newton_steps;
        if verify_pacing(&out, values, budgets, Some(boosts), opts.tol).pass {
            return Ok(out);
        }
    }

    let mut cleaned = x.clone();
    problem.clean(&mut cleaned);
    let mut out = problem.outcome(&cleaned);
    out.iterations = newton_steps;
    let report = verify_pacing(&out, values, budgets, Some(boosts), opts.tol);
    if report.pass {
        Ok(out)
    } else {
        Err(Error::NoConvergence {
            iterations: newton_steps,
            residual: report.max_residual(),
        })
    }
}

/// Buyers whose budget is below `DUST` times the sub-market's money cannot
/// move any price. The others are solved without them. An item whose price
/// falls short of a dust buyer's boost is captured whole by the dust buyer
/// with the largest boost on it and removed from the others' market, which
/// is then solved again. A dust buyer that values what it captured spends its
/// budget there; otherwise it ties at its cheapest remaining item per unit of
/// value, `α_i = min_j (p_j − c_ij) / v_ij`, and buys `B_i / (p_j − c_ij)` of
/// it from the item's largest holder. Near-ties between a boost and a price
/// are left to the full solver.
fn solve_without_dust(
    values: &Matrix,
    budgets: &[f64],
    boosts: &BoostMatrix,
    opts: &SolverOptions,
    warm: Option<&PacingOutcome>,
    part: &Participants,
    dust: &[usize],
) -> Option<PacingOutcome> {
    let mut rest = budgets.to_vec();
    for &i in dust {
        rest[i] = 0.0;
    }
    let (n, m) = values.shape();
    let mut captured: Vec<Option<usize>> = vec![None; m];
    let mut rest_values = values.clone();
    let mut out = solve_submarket_boosted_from(values, &rest, boosts, opts, warm).ok()?;
    // Every pass captures at least one item, so this terminates.
    loop {
        let mut grew = false;
        for &j in &part.items {
            if captured[j].is_some() {
                continue;
            }
            let tol = 1e-9 * out.prices[j].max(1.0);
            let top = dust.iter().copied().max_by(|&a, &b| boosts[(a, j)].total_cmp(&boosts[(b, j)]))?;
            let margin = out.prices[j] - boosts[(top, j)];
            if margin.abs() <= tol {
                return None;
            }
            if margin < 0.0 {
                captured[j] = Some(top);
                for i in 0..n {
                    rest_values[(i, j)] = 0.0;
                }
                grew = true;
            }
        }
        if !grew {
            break;
        }
        out = solve_submarket_boosted_from(&rest_values, &rest, boosts, opts, None).ok()?;
    }

    let mut alphas = out.alphas.clone();
    let mut x = out.allocation.clone();
    for (j, holder) in captured.iter().enumerate() {
        if let Some(h) = *holder {
            for i in 0..n {
                x[(i, j)] = 0.0;
            }
            x[(h, j)] = 1.0;
        }
    }
    for &i in dust {
        let held: f64 = (0..m).filter(|&j| captured[j] == Some(i)).map(|j| values[(i, j)]).sum();
        if held > 0.0 {
            alphas[i] = budgets[i] / held;
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for &j in &part.items {
            if captured[j].is_some() || values[(i, j)] <= 0.0 {
                continue;
            }
            let a = (out.prices[j] - boosts[(i, j)]) / values[(i, j)];
            if best.is_none_or(|(b, _)| a < b) {
                best = Some((a, j));
            }
        }
        let (a, j) = best?;
        let amount = budgets[i] / (out.prices[j] - boosts[(i, j)]);
        let holder = (0..n).max_by(|&p, &q| x[(p, j)].total_cmp(&x[(q, j)]))?;
        if x[(holder, j)] < amount {
            return None;
        }
        x[(holder, j)] -= amount;
        x[(i, j)] += amount;
        alphas[i] = a;
    }
    let iterations = out.iterations;
    out = PacingOutcome::from_parts(values, Some(boosts), alphas, x);
    out.iterations = iterations;
    verify_pacing(&out, values, budgets, Some(boosts), opts.tol).pass.then_some(out)
}

fn dust_buyers(budgets: &[f64], part: &Participants) -> Vec<usize> {
    let total: f64 = part.buyers.iter().map(|&i| budgets[i]).sum();
    part.buyers.iter().copied().filter(|&i| budgets[i] < DUST * total).collect()
}

/// Fallback for dust buyers tied with a price: solves with every dust budget
/// raised to `LIFT` times the sub-market's money, then shrinks each dust
/// buyer's paid holdings in proportion and returns the difference to the
/// item's largest other holder. Holdings won at the boost alone cost nothing
/// and are kept.
fn solve_lifted(
    values: &Matrix,
    budgets: &[f64],
    boosts: &BoostMatrix,
    opts: &SolverOptions,
    dust: &[usize],
) -> Option<PacingOutcome> {
    const LIFT: f64 = 1e-10;
    let total: f64 = budgets.iter().sum();
    let mut lifted = budgets.to_vec();
    for &i in dust {
        lifted[i] = LIFT * total;
    }
    let out = solve_submarket_boosted_from(values, &lifted, boosts, opts, None).ok()?;
    let (n, m) = values.shape();
    let mut x = out.allocation.clone();
    for &i in dust {
        let shrink = budgets[i] / lifted[i];
        for j in 0..m {
            if out.prices[j] - boosts[(i, j)] <= 1e-12 * out.prices[j].max(1.0) || x[(i, j)] == 0.0 {
                continue;
            }
            let kept = x[(i, j)] * shrink;
            let freed = x[(i, j)] - kept;
            x[(i, j)] = kept;
            let holder = (0..n)
                .filter(|k| !dust.contains(k))
                .max_by(|&p, &q| x[(p, j)].total_cmp(&x[(q, j)]))?;
            x[(holder, j)] += freed;
        }
    }
    let mut fixed = PacingOutcome::from_parts(values, Some(boosts), out.alphas.clone(), x);
    fixed.iterations = out.iterations;
    verify_pacing(&fixed, values, budgets, Some(boosts), opts.tol).pass.then_some(fixed)
}

struct Problem<'a> {
    values: &'a Matrix,
    budgets: &'a [f64],
    boosts: &'a Matrix,
    part: &'a Participants,
    /// Candidate pairs (buyer, item): participating buyer, contested item,
    /// positive value or positive boost.
    edges: Vec<(usize, usize)>,
    by_item: Vec<Vec<usize>>,
    by_buyer: Vec<Vec<usize>>,
    scale: f64,
}

impl<'a> Problem<'a> {
    fn new(values: &'a Matrix, budgets: &'a [f64], boosts: &'a Matrix, part: &'a Participants) -> Self {
        let (n, m) = values.shape();
        let mut edges = Vec::new();
        let mut by_item = vec![Vec::new(); m];
        let mut by_buyer = vec![Vec::new(); n];
        for &j in &part.items {
            for &i in &part.buyers {
                if values[(i, j)] > 0.0 || boosts[(i, j)] > 0.0 {
                    by_item[j].push(edges.len());
                    by_buyer[i].push(edges.len());
                    edges.push((i, j));
                }
            }
        }
        let scale = part.buyers.iter().map(|&i| budgets[i]).sum();
        Self {
            values,
            budgets,
            boosts,
            part,
            edges,
            by_item,
            by_buyer,
            scale,
        }
    }

    fn utilities(&self, x: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.values.rows()];
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            u[i] += self.values[(i, j)] * x[e];
        }
        u
    }

    fn barrier_objective(&self, x: &[f64], mu: f64) -> f64 {
        if x.iter().any(|&v| v <= 0.0) {
            return f64::NEG_INFINITY;
        }
        let u = self.utilities(x);
        let mut f = 0.0;
        for &i in &self.part.buyers {
            if u[i] <= 0.0 {
                return f64::NEG_INFINITY;
            }
            f += self.budgets[i] * u[i].ln();
        }
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            f += self.boosts[(i, j)] * x[e] + mu * x[e].ln();
        }
        f
    }

    /// Log-barrier path following; returns the final iterate and the number
    /// of Newton steps taken.
    fn interior_point(&self, max_steps: usize) -> (Vec<f64>, usize) {
        let ne = self.edges.len();
        let items = &self.part.items;
        let dim = ne + items.len();
        let mut x: Vec<f64> = self
            .edges
            .iter()
            .map(|&(_, j)| 1.0 / self.by_item[j].len() as f64)
            .collect();
        let item_row: Vec<usize> = {
            let mut r = vec![usize::MAX; self.values.cols()];
            for (c, &j) in items.iter().enumerate() {
                r[j] = ne + c;
            }
            r
        };

        let per_edge = self.scale / ne as f64;
        let mut mu = 0.1 * per_edge;
        let mu_end = 1e-14 * per_edge;
        let mut steps = 0;
        loop {
            for _ in 0..60 {
                if steps >= max_steps {
                    return (x, steps);
                }
                steps += 1;
                let u = self.utilities(&x);
                let mut kkt = DMatrix::<f64>::zeros(dim, dim);
                let mut rhs = DVector::<f64>::zeros(dim);
                for (e, &(i, j)) in self.edges.iter().enumerate() {
                    let g = self.budgets[i] * self.values[(i, j)] / u[i] + self.boosts[(i, j)] + mu / x[e];
                    rhs[e] = -g;
                    kkt[(e, e)] -= mu / (x[e] * x[e]);
                    let w = self.budgets[i] / (u[i] * u[i]);
                    for &f in &self.by_buyer[i] {
                        let (_, jf) = self.edges[f];
                        kkt[(e, f)] -= w * self.values[(i, j)] * self.values[(i, jf)];
                    }
                    kkt[(e, item_row[j])] = 1.0;
                    kkt[(item_row[j], e)] = 1.0;
                }
                let Some(sol) = kkt.lu().solve(&rhs) else {
                    return (x, steps);
                };
                let d: Vec<f64> = (0..ne).map(|e| sol[e]).collect();
                let dec: f64 = (0..ne).map(|e| -rhs[e] * d[e]).sum();
                if !(dec > 1e-13 * mu * ne as f64) {
                    break;
                }
                let mut t: f64 = 1.0;
                for e in 0..ne {
                    if d[e] < 0.0 {
                        t = t.min(-0.99 * x[e] / d[e]);
                    }
                }
                let f0 = self.barrier_objective(&x, mu);
                let mut accepted = false;
                while t > 1e-14 {
                    let trial: Vec<f64> = (0..ne).map(|e| x[e] + t * d[e]).collect();
                    let f1 = self.barrier_objective(&trial, mu);
                    if f1 >= f0 + 0.01 * t * dec || (f1 - f0).abs() <= 1e-15 * f0.abs().max(1.0) && f1.is_finite() {
                        x = trial;
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            if mu <= mu_end {
                return (x, steps);
            }
            mu = (mu * 0.1).max(mu_end);
        }
    }

    /// Pairs the barrier iterate treats as trading: large in absolute terms,
    /// or a non-negligible share of the buyer's utility while above barrier
    /// noise. Shares are measured in utility so that an item won through the
    /// boost alone does not mask the buyer's valued holdings.
    fn support(&self, x: &[f64]) -> Vec<usize> {
        let u = self.utilities(x);
        (0..self.edges.len())
            .filter(|&e| {
                let (i, j) = self.edges[e];
                x[e] > 1e-8 || (self.values[(i, j)] * x[e] > 1e-4 * u[i] && x[e] > 1e-13)
            })
            .collect()
    }

    fn outcome(&self, x: &[f64]) -> PacingOutcome {
        let (n, m) = self.values.shape();
        let u = self.utilities(x);
        let mut alphas = vec![0.0; n];
        for &i in &self.part.buyers {
            alphas[i] = self.budgets[i] / u[i];
        }
        let mut alloc = Matrix::zeros(n, m);
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            alloc[(i, j)] = x[e].max(0.0);
        }
        PacingOutcome::from_parts(self.values, Some(self.boosts), alphas, alloc)
    }

    /// Zeroes the barrier residue on dominated pairs and renormalizes columns.
    fn clean(&self, x: &mut [f64]) {
        for &j in &self.part.items {
            let col = &self.by_item[j];
            let top = col.iter().map(|&e| x[e]).fold(0.0, f64::max);
            for &e in col {
                if x[e] < 1e-9 * top {
                    x[e] = 0.0;
                }
            }
            let s: f64 = col.iter().map(|&e| x[e]).sum();
            for &e in col {
                x[e] /= s;
            }
        }
    }

    fn warm_polish(&self, prev: &PacingOutcome) -> Option<PacingOutcome> {
        if prev.allocation.shape() != self.values.shape() {
            return None;
        }
        if self.part.buyers.iter().any(|&i| prev.alphas[i] <= 0.0) {
            return None;
        }
        let x: Vec<f64> = self.edges.iter().map(|&(i, j)| prev.allocation[(i, j)]).collect();
        let support = (0..self.edges.len()).filter(|&e| x[e] > 1e-12).collect();
        self.newton_polish(support, &prev.alphas, &prev.prices, &x)
    }

    fn newton_polish(&self, mut support: Vec<usize>, alphas: &[f64], prices: &[f64], x0: &[f64]) -> Option<PacingOutcome> {
        let (n, m) = self.values.shape();
        let buyers = &self.part.buyers;
        let items = &self.part.items;
        let (nb, ni) = (buyers.len(), items.len());
        let mut buyer_pos = vec![usize::MAX; n];
        for (b, &i) in buyers.iter().enumerate() {
            buyer_pos[i] = b;
        }
        let mut item_pos = vec![usize::MAX; m];
        for (c, &j) in items.iter().enumerate() {
            item_pos[j] = c;
        }
        let mut alpha: Vec<f64> = buyers.iter().map(|&i| alphas[i]).collect();
        let mut price: Vec<f64> = items.iter().map(|&j| prices[j]).collect();
        let mut x = x0.to_vec();

        for _ in 0..(2 * (nb + ni) + 8) {
            support.sort_unstable();
            support.dedup();
            let ns = support.len();
            let dim = nb + ni + ns;
            let mut converged = false;
            let mut previous = f64::INFINITY;
            for _ in 0..50 {
                let mut res = DVector::<f64>::zeros(dim);
                let mut jac = DMatrix::<f64>::zeros(dim, dim);
                // z = [alpha (nb), price (ni), x_s (ns)]
                let mut worst: f64 = 0.0;
                let mut value_sum = vec![0.0; nb];
                let mut col_sum = vec![0.0; ni];
                for (s, &e) in support.iter().enumerate() {
                    let (i, j) = self.edges[e];
                    let (b, c) = (buyer_pos[i], item_pos[j]);
                    let v = self.values[(i, j)];
                    let r = alpha[b] * v + self.boosts[(i, j)] - price[c];
                    res[s] = r;
                    worst = worst.max(r.abs() / price[c].abs().max(1.0));
                    jac[(s, b)] = v;
                    jac[(s, nb + c)] = -1.0;
                    value_sum[b] += v * x[e];
                    col_sum[c] += x[e];
                    jac[(ns + c, nb + ni + s)] = 1.0;
                    jac[(ns + ni + b, nb + ni + s)] = alpha[b] * v;
                }
                for c in 0..ni {
                    // Rounding noise in a column sum would otherwise be pushed
                    // onto tiny entries, wrecking their buyers' budget rows.
                    let r = col_sum[c] - 1.0;
                    res[ns + c] = if r.abs() <= 4.0 * f64::EPSILON { 0.0 } else { r };
                    worst = worst.max(res[ns + c].abs());
                }
                for (b, &i) in buyers.iter().enumerate() {
                    res[ns + ni + b] = alpha[b] * value_sum[b] - self.budgets[i];
                    worst = worst.max(res[ns + ni + b].abs() / self.budgets[i]);
                    jac[(ns + ni + b, b)] = value_sum[b];
                }
                // Large multipliers put a noise floor above 1e-14; stop once
                // progress stalls below a level the final check accepts.
                if worst < 1e-14 || (worst < 1e-11 && worst >= 0.5 * previous) {
                    converged = true;
                    break;
                }
                if !worst.is_finite() {
                    return None;
                }
                previous = worst;
                // rows: [pair eqs (ns), item eqs (ni), buyer eqs (nb)], cols: [alpha, price, x]
                // Tied bids on a cycle of trading pairs leave the allocation
                // along the cycle (nearly) free; the least-norm step ignores
                // those directions instead of amplifying rounding along them.
                let svd = jac.svd(true, true);
                let cutoff = 1e-12 * svd.singular_values.max();
                let delta = svd.solve(&res, cutoff).ok()?;
                for b in 0..nb {
                    alpha[b] -= delta[b];
                }
                for c in 0..ni {
                    price[c] -= delta[nb + c];
                }
                for (s, &e) in support.iter().enumerate() {
                    x[e] -= delta[nb + ni + s];
                }
            }
            if !converged || alpha.iter().any(|&a| !(a > 0.0)) {
                return None;
            }

            let (neg_s, neg) = support
                .iter()
                .enumerate()
                .map(|(s, &e)| (s, x[e]))
                .fold((usize::MAX, 0.0), |acc, (s, v)| if v < acc.1 { (s, v) } else { acc });
            if neg < -1e-12 {
                let e = support.remove(neg_s);
                x[e] = 0.0;
                continue;
            }

            let in_support = {
                let mut f = vec![false; self.edges.len()];
                support.iter().for_each(|&e| f[e] = true);
                f
            };
            let mut worst_gap = 0.0;
            let mut entering = None;
            for (e, &(i, j)) in self.edges.iter().enumerate() {
                if in_support[e] {
                    continue;
                }
                let c = item_pos[j];
                let gap = (alpha[buyer_pos[i]] * self.values[(i, j)] + self.boosts[(i, j)] - price[c])
                    / price[c].abs().max(1.0);
                if gap > worst_gap {
                    worst_gap = gap;
                    entering = Some(e);
                }
            }
            if worst_gap > 1e-11 {
                let e = entering.unwrap();
                x[e] = 0.0;
                support.push(e);
                continue;
            }

            let mut global_alpha = vec![0.0; n];
            for (b, &i) in buyers.iter().enumerate() {
                global_alpha[i] = alpha[b];
            }
            let mut alloc = Matrix::zeros(n, m);
            for &e in &support {
                let (i, j) = self.edges[e];
                alloc[(i, j)] = x[e].max(0.0);
            }
            return Some(PacingOutcome::from_parts(self.values, Some(self.boosts), global_alpha, alloc));
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_submarket;

    fn crossed() -> Matrix {
        Matrix::from_nested(&[[2.0, 1.0], [1.0, 2.0]])
    }

    #[test]
    fn crossed_pair_with_boosts() {
        let c = Matrix::from_nested(&[[0.5, 3.2], [0.0, 0.0]]);
        let out = solve_submarket_boosted(&crossed(), &[2.0, 2.0], &c, &SolverOptions::default()).unwrap();
        let want = Matrix::from_nested(&[[1.0, 0.5], [0.0, 0.5]]);
        assert!(out.allocation.max_abs_diff(&want) < 1e-9, "{:?}", out.allocation);
        assert!((out.alphas[0] - 0.8).abs() < 1e-9);
        assert!((out.alphas[1] - 2.0).abs() < 1e-9);
        assert!((out.spend[0] - 2.0).abs() < 1e-9 && (out.spend[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_boosts_match_plain_solver() {
        let v = Matrix::from_nested(&[[0.3, 0.9, 0.1], [0.8, 0.2, 0.5], [0.4, 0.4, 0.9]]);
        let b = [1.0, 0.7, 1.3];
        let o = SolverOptions::default();
        let plain = solve_submarket(&v, &b, &o).unwrap();
        let boosted = solve_submarket_boosted(&v, &b, &Matrix::zeros(3, 3), &o).unwrap();
        for i in 0..3 {
            assert!((plain.utilities[i] - boosted.utilities[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn degenerate_kink_without_boosts() {
        for b in [1.0, 4.0, 0.25, 10.0] {
            let out =
                solve_submarket_boosted(&crossed(), &[2.0, b], &Matrix::zeros(2, 2), &SolverOptions::default())
                    .unwrap();
            let f = crate::incentives::crossed_pair_utility(b);
            assert!((out.utilities[1] - f).abs() < 1e-7, "b={b}");
        }
    }

    #[test]
    fn column_shift_is_neutral() {
        let v = Matrix::from_nested(&[[0.3, 0.9, 0.1], [0.8, 0.2, 0.5], [0.4, 0.4, 0.9]]);
        let b = [1.0, 0.7, 1.3];
        let c = Matrix::from_nested(&[[0.2, 0.0, 0.4], [0.0, 0.3, 0.1], [0.1, 0.1, 0.0]]);
        let mut shifted = c.clone();
        for i in 0..3 {
            shifted[(i, 1)] += 0.75;
        }
        let o = SolverOptions::default();
        let a = solve_submarket_boosted(&v, &b, &c, &o).unwrap();
        let s = solve_submarket_boosted(&v, &b, &shifted, &o).unwrap();
        assert!(a.allocation.max_abs_diff(&s.allocation) < 1e-7);
        for i in 0..3 {
            assert!((a.utilities[i] - s.utilities[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn warm_start_reaches_same_point() {
        let v = Matrix::from_nested(&[[0.3, 0.9, 0.1], [0.8, 0.2, 0.5], [0.4, 0.4, 0.9]]);
        let c = Matrix::from_nested(&[[0.2, 0.0, 0.4], [0.0, 0.3, 0.1], [0.1, 0.1, 0.0]]);
        let o = SolverOptions::default();
        let a = solve_submarket_boosted(&v, &[1.0, 0.7, 1.3], &c, &o).unwrap();
        let cold = solve_submarket_boosted(&v, &[1.05, 0.7, 1.25], &c, &o).unwrap();
        let warm = solve_submarket_boosted_from(&v, &[1.05, 0.7, 1.25], &c, &o, Some(&a)).unwrap();
        for i in 0..3 {
            assert!((cold.utilities[i] - warm.utilities[i]).abs() < 1e-9);
        }
    }
}
