use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::equilibrium::{
    check_shapes, solve_market_ce, BoostMatrix, SolverOptions,
};
use crate::error::{Error, Result};
use crate::market::ValidatedMarket;
use crate::matrix::Matrix;

/// Worst-case factor between a seller's best deviation revenue and its
/// competitive-equilibrium revenue.
pub const SELLER_BOUND: f64 = 5.0;

/// Default lower bound on the utility a buyer receives from other sellers.
pub fn default_epsilon(market: &ValidatedMarket) -> f64 {
    1e-6 * market.budgets().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Multipliers and boosts under which `target` is a pacing equilibrium.
///
/// `α_i = B_i / u_i(target)`. In every column, buyers receiving part of the
/// item tie at the top boosted bid, which beats every other bid by a margin
/// of `1e-6` times the column's largest bid. Each column is then shifted so
/// its smallest boost is zero.
pub fn synthesize_boosts(values: &Matrix, budgets: &[f64], target: &Matrix) -> Result<(Vec<f64>, BoostMatrix)> {
    check_shapes(values, budgets, Some(target))?;
    let (n, m) = values.shape();
    for j in 0..m {
        let s = target.col_sum(j);
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InfeasibleTarget(format!("item {j} is allocated {s}, not 1")));
        }
    }
    let mut alphas = vec![0.0; n];
    for i in 0..n {
        let u: f64 = (0..m).map(|j| values[(i, j)] * target[(i, j)]).sum();
        if budgets[i] > 0.0 {
            if !(u > 0.0) {
                return Err(Error::InfeasibleTarget(format!(
                    "buyer {i} has budget {} but receives no value",
                    budgets[i]
                )));
            }
            alphas[i] = budgets[i] / u;
        } else if target.row(i).iter().any(|&x| x > 0.0) {
            return Err(Error::InfeasibleTarget(format!("buyer {i} has no budget but receives items")));
        }
    }
    let mut boosts = Matrix::zeros(n, m);
    for j in 0..m {
        let bid = |i: usize| alphas[i] * values[(i, j)];
        let top = (0..n).map(bid).fold(0.0, f64::max);
        let margin = 1e-6 * if top > 0.0 { top } else { 1.0 };
        let winners = (0..n).filter(|&i| target[(i, j)] > 0.0);
        let losers = (0..n).filter(|&i| target[(i, j)] <= 0.0 && alphas[i] > 0.0);
        let level = winners
            .clone()
            .map(bid)
            .fold(0.0, f64::max)
            .max(losers.map(|i| bid(i) + margin).fold(0.0, f64::max));
        for i in winners {
            boosts[(i, j)] = level - bid(i);
        }
        let floor = (0..n).map(|i| boosts[(i, j)]).fold(f64::INFINITY, f64::min);
        for i in 0..n {
            boosts[(i, j)] = (boosts[(i, j)] - floor).max(0.0);
        }
    }
    Ok((alphas, boosts))
}

/// Utilities of the allocation maximizing `Σ_i g_i u_i`: each item goes
/// wholly to a buyer with the largest `g_i v_ij`, ties to the lowest index.
pub fn seller_linear_oracle(values: &Matrix, weights: &[f64]) -> Vec<f64> {
    let mut u = vec![0.0; values.rows()];
    for j in 0..values.cols() {
        let w = oracle_winner(values, weights, j);
        u[w] += values[(w, j)];
    }
    u
}

fn oracle_winner(values: &Matrix, weights: &[f64], j: usize) -> usize {
    let mut best = 0;
    for i in 1..values.rows() {
        if weights[i] * values[(i, j)] > weights[best] * values[(best, j)] {
            best = i;
        }
    }
    best
}

/// Controls for [`seller_best_response`].
#[derive(Debug, Clone, Copy)]
pub struct BestResponseOptions {
    /// Frank-Wolfe iteration cap.
    pub iters: usize,
    /// Target Frank-Wolfe duality gap.
    pub tol: f64,
    /// Floor on opponents' utilities; `None` uses [`default_epsilon`].
    pub epsilon: Option<f64>,
}

impl Default for BestResponseOptions {
    fn default() -> Self {
        Self {
            iters: 5_000,
            tol: 1e-7,
            epsilon: None,
        }
    }
}

/// A seller's revenue-maximizing allocation against fixed opponents.
#[derive(Debug, Clone, Serialize)]
pub struct SellerBestResponse {
    /// Per-buyer utility from this seller.
    pub utilities: Vec<f64>,
    /// Allocation of the seller's own items (columns in the seller's order).
    pub allocation: Matrix,
    pub revenue: f64,
    /// Frank-Wolfe duality gap at the returned point.
    pub gap: f64,
    pub iterations: usize,
    /// Revenue after every Frank-Wolfe iteration.
    pub history: Vec<f64>,
}

/// Maximizes `R_k(u) = Σ_i B_i u_i / (u_i + w_i)` over the utilities seller
/// `k` can deliver, `w_i` being what buyer `i` gets from everyone else.
pub fn seller_best_response(
    market: &ValidatedMarket,
    seller: usize,
    opponents: &[f64],
    opts: &BestResponseOptions,
) -> Result<SellerBestResponse> {
    if seller >= market.num_sellers() {
        return Err(Error::Domain(format!("seller {seller} does not exist")));
    }
    if opponents.len() != market.num_buyers() {
        return Err(Error::ShapeMismatch(format!(
            "{} opponent utilities for {} buyers",
            opponents.len(),
            market.num_buyers()
        )));
    }
    let floor = opts.epsilon.unwrap_or_else(|| default_epsilon(market));
    if let Some((i, &w)) = opponents.iter().enumerate().find(|(_, &w)| !(w >= floor)) {
        return Err(Error::EpsilonFloorViolated {
            buyer: i,
            seller,
            value: w,
            floor,
        });
    }
    Ok(revenue_best_response(
        &market.seller_values(seller),
        market.budgets(),
        opponents,
        opts,
        None,
    ))
}

pub(crate) fn revenue(budgets: &[f64], u: &[f64], w: &[f64]) -> f64 {
    budgets.iter().zip(u).zip(w).map(|((b, u), w)| b * u / (u + w)).sum()
}

struct Revenue<'a> {
    values: &'a Matrix,
    budgets: &'a [f64],
    w: &'a [f64],
}

impl Revenue<'_> {
    fn utilities(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows())
            .map(|i| (0..x.cols()).map(|j| self.values[(i, j)] * x[(i, j)]).sum())
            .collect()
    }

    fn weights(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len())
            .map(|i| self.budgets[i] * self.w[i] / (u[i] + self.w[i]).powi(2))
            .collect()
    }

    fn gap(&self, x: &Matrix, g: &[f64]) -> f64 {
        let mut gap = 0.0;
        for j in 0..x.cols() {
            let s = oracle_winner(self.values, g, j);
            let here: f64 = (0..x.rows()).map(|i| g[i] * self.values[(i, j)] * x[(i, j)]).sum();
            gap += g[s] * self.values[(s, j)] - here;
        }
        gap
    }

    /// `x` with its duality gap.
    fn scored(&self, x: Matrix) -> (Matrix, f64) {
        let gap = self.gap(&x, &self.weights(&self.utilities(&x)));
        (x, gap)
    }

    /// Maximizer of the revenue on `u + γ δ`, γ ∈ [0, 1].
    fn line_search(&self, u: &[f64], delta: &[f64]) -> f64 {
        let slope = |t: f64| -> f64 {
            (0..u.len())
                .map(|i| self.budgets[i] * self.w[i] / (u[i] + t * delta[i] + self.w[i]).powi(2) * delta[i])
                .sum()
        };
        if slope(1.0) >= 0.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Frank-Wolfe iterations between attempts to finish the solve exactly.
const HANDOFF: usize = 100;

/// Frank-Wolfe with away-pairwise steps and exact line search. A warm start
/// is first tried with a Newton solve of the optimality system on its
/// support; a stalled Frank-Wolfe run hands off to a barrier method whose
/// support is then polished the same way. The returned gap is always the
/// Frank-Wolfe duality gap at the returned point.
pub(crate) fn revenue_best_response(
    values: &Matrix,
    budgets: &[f64],
    w: &[f64],
    opts: &BestResponseOptions,
    start: Option<&Matrix>,
) -> SellerBestResponse {
    let (n, m) = values.shape();
    let f = Revenue { values, budgets, w };
    let target = 1e-3 * opts.tol;
    let done = |x: Matrix, gap: f64, iterations: usize, history: Vec<f64>| {
        let u = f.utilities(&x);
        SellerBestResponse {
            revenue: revenue(budgets, &u, w),
            utilities: u,
            allocation: x,
            gap: gap.max(0.0),
            iterations,
            history,
        }
    };
    if let Some(x0) = start {
        if let Some((x, gap)) = newton_polish(&f, x0).map(|x| f.scored(x)) {
            if gap < target {
                let r = revenue(budgets, &f.utilities(&x), w);
                return done(x, gap, 0, vec![r]);
            }
        }
    }

    let mut x = match start {
        Some(x0) => x0.clone(),
        None => vertex(values, &f.weights(&vec![0.0; n])),
    };
    let mut u = f.utilities(&x);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut handed_off = false;
    for it in 0..opts.iters {
        iterations = it;
        let g = f.weights(&u);
        gap = f.gap(&x, &g);
        if gap < target {
            break;
        }
        if it > 0 && it % HANDOFF == 0 && !handed_off {
            handed_off = true;
            if let Some((y, gy)) = finish(&f, &x) {
                let ry = revenue(budgets, &f.utilities(&y), w);
                if gy < gap && ry >= revenue(budgets, &u, w) {
                    x = y;
                    u = f.utilities(&x);
                    gap = gy;
                    history.push(ry);
                    if gap < target {
                        break;
                    }
                    continue;
                }
            }
        }
        let mut d_fw = vertex(values, &g);
        for (d, xv) in d_fw.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *d -= xv;
        }
        let mut d_pw = Matrix::zeros(n, m);
        for j in 0..m {
            let s = oracle_winner(values, &g, j);
            let away = (0..n)
                .filter(|&i| x[(i, j)] > 0.0)
                .min_by(|&a, &b| (g[a] * values[(a, j)]).total_cmp(&(g[b] * values[(b, j)])));
            if let Some(a) = away {
                if a != s {
                    d_pw[(s, j)] += x[(a, j)];
                    d_pw[(a, j)] -= x[(a, j)];
                }
            }
        }
        let slope = |d: &Matrix| -> f64 {
            (0..n)
                .map(|i| g[i] * (0..m).map(|j| values[(i, j)] * d[(i, j)]).sum::<f64>())
                .sum()
        };
        let d = if slope(&d_pw) > slope(&d_fw) { d_pw } else { d_fw };
        let delta = f.utilities(&d);
        let step = f.line_search(&u, &delta);
        for (xv, dv) in x.as_mut_slice().iter_mut().zip(d.as_slice()) {
            *xv = (*xv + step * dv).max(0.0);
        }
        u = f.utilities(&x);
        history.push(revenue(budgets, &u, w));
    }
    if gap >= target && !handed_off {
        if let Some((y, gy)) = finish(&f, &x) {
            let ry = revenue(budgets, &f.utilities(&y), w);
            if gy < gap && ry >= revenue(budgets, &u, w) {
                x = y;
                gap = gy;
                history.push(ry);
            }
        }
    }
    done(x, gap, iterations, history)
}

/// Best of a Newton polish from `x`, a barrier solve, and a Newton polish of
/// the barrier solution, scored by duality gap.
fn finish(f: &Revenue<'_>, x: &Matrix) -> Option<(Matrix, f64)> {
    let target = f64::EPSILON * f.budgets.iter().sum::<f64>();
    let mut best: Option<(Matrix, f64)> = newton_polish(f, x).map(|y| f.scored(y));
    if best.as_ref().is_some_and(|b| b.1 <= 1e3 * target) {
        return best;
    }
    let keep = |best: &mut Option<(Matrix, f64)>, cand: (Matrix, f64)| {
        if best.as_ref().is_none_or(|b| cand.1 < b.1) {
            *best = Some(cand);
        }
    };
    if let Some(y) = interior_point(f) {
        if let Some(z) = newton_polish(f, &y) {
            keep(&mut best, f.scored(z));
        }
        keep(&mut best, f.scored(y));
    }
    best
}

fn vertex(values: &Matrix, g: &[f64]) -> Matrix {
    let mut s = Matrix::zeros(values.rows(), values.cols());
    for j in 0..values.cols() {
        s[(oracle_winner(values, g, j), j)] = 1.0;
    }
    s
}

/// Maximizes the revenue plus `μ Σ ln x_ij` over positively-valued pairs for
/// a decreasing sequence of `μ`. Items nobody values go to buyer 0.
fn interior_point(f: &Revenue<'_>) -> Option<Matrix> {
    let values = f.values;
    let (n, m) = values.shape();
    if f.w.iter().any(|&w| !(w > 0.0)) {
        return None;
    }
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| values[(i, j)] > 0.0)
        .collect();
    let ne = edges.len();
    let mut row = vec![usize::MAX; m];
    let mut per_item = vec![0usize; m];
    for &(_, j) in &edges {
        per_item[j] += 1;
    }
    let mut next = ne;
    for j in 0..m {
        if per_item[j] > 0 {
            row[j] = next;
            next += 1;
        }
    }
    let dim = next;
    let mut x: Vec<f64> = edges.iter().map(|&(_, j)| 1.0 / per_item[j] as f64).collect();
    let utilities = |x: &[f64]| {
        let mut u = vec![0.0; n];
        for (e, &(i, j)) in edges.iter().enumerate() {
            u[i] += values[(i, j)] * x[e];
        }
        u
    };
    let objective = |x: &[f64], mu: f64| {
        let u = utilities(x);
        revenue(f.budgets, &u, f.w) + mu * x.iter().map(|v| v.ln()).sum::<f64>()
    };

    let scale: f64 = f.budgets.iter().sum();
    let per_edge = scale / ne.max(1) as f64;
    let mut mu = 0.1 * per_edge;
    let mu_end = 1e-14 * per_edge;
    loop {
        for _ in 0..60 {
            let u = utilities(&x);
            let d1: Vec<f64> = (0..n).map(|i| f.budgets[i] * f.w[i] / (u[i] + f.w[i]).powi(2)).collect();
            let d2: Vec<f64> = (0..n).map(|i| -2.0 * f.budgets[i] * f.w[i] / (u[i] + f.w[i]).powi(3)).collect();
            let mut kkt = DMatrix::<f64>::zeros(dim, dim);
            let mut rhs = DVector::<f64>::zeros(dim);
            for (e, &(i, j)) in edges.iter().enumerate() {
                rhs[e] = -(d1[i] * values[(i, j)] + mu / x[e]);
                kkt[(e, e)] -= mu / (x[e] * x[e]);
                for (h, &(ih, jh)) in edges.iter().enumerate() {
                    if ih == i {
                        kkt[(e, h)] += d2[i] * values[(i, j)] * values[(i, jh)];
                    }
                }
                kkt[(e, row[j])] = 1.0;
                kkt[(row[j], e)] = 1.0;
            }
            let sol = kkt.lu().solve(&rhs)?;
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
            let f0 = objective(&x, mu);
            let mut accepted = false;
            while t > 1e-14 {
                let trial: Vec<f64> = (0..ne).map(|e| x[e] + t * d[e]).collect();
                let f1 = objective(&trial, mu);
                if f1.is_finite() && (f1 >= f0 + 0.01 * t * dec || (f1 - f0).abs() <= 1e-15 * f0.abs().max(1.0)) {
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
            break;
        }
        mu = (mu * 0.1).max(mu_end);
    }
    let mut out = Matrix::zeros(n, m);
    for (e, &(i, j)) in edges.iter().enumerate() {
        out[(i, j)] = x[e];
    }
    for j in 0..m {
        if per_item[j] == 0 {
            out[(0, j)] = 1.0;
        }
    }
    Some(out)
}

/// Trading pairs of `x`: a maximum-weight spanning forest of the pairs
/// carrying mass, so the optimality system below is never overdetermined.
fn support_forest(values: &Matrix, x: &Matrix) -> Vec<(usize, usize)> {
    let (n, m) = values.shape();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| values[(i, j)] > 0.0 && x[(i, j)] > 1e-9)
        .collect();
    pairs.sort_by(|a, b| x[*b].total_cmp(&x[*a]));
    let mut parent: Vec<usize> = (0..n + m).collect();
    fn root(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let mut forest = Vec::new();
    for (i, j) in pairs {
        let (a, b) = (root(&mut parent, i), root(&mut parent, n + j));
        if a != b {
            parent[a] = b;
            forest.push((i, j));
        }
    }
    forest
}

/// Solves `g_i(u_i) v_ij = q_j` on trading pairs, `Σ_i x_ij = 1`, `u = V x`
/// by Newton's method, adjusting the set of trading pairs until no pair has
/// negative mass and no outside pair beats its item's multiplier.
fn newton_polish(f: &Revenue<'_>, x0: &Matrix) -> Option<Matrix> {
    let values = f.values;
    let (n, m) = values.shape();
    if f.w.iter().any(|&w| !(w > 0.0)) {
        return None;
    }
    let valued: Vec<bool> = (0..m).map(|j| (0..n).any(|i| values[(i, j)] > 0.0)).collect();
    let mut support = support_forest(values, x0);
    if (0..m).any(|j| valued[j] && !support.iter().any(|&(_, s)| s == j)) {
        return None;
    }
    let mut x = x0.clone();
    let mut u = f.utilities(&x);
    let g0 = f.weights(&u);
    let mut q: Vec<f64> = (0..m)
        .map(|j| (0..n).map(|i| g0[i] * values[(i, j)]).fold(0.0, f64::max))
        .collect();
    let dg = |i: usize, u: f64| -2.0 * f.budgets[i] * f.w[i] / (u + f.w[i]).powi(3);

    for _ in 0..(n * m + 10) {
        let ns = support.len();
        let dim = ns + m + n;
        let mut xs: Vec<f64> = support.iter().map(|&(i, j)| x[(i, j)]).collect();
        let mut converged = false;
        for _ in 0..40 {
            let g = f.weights(&u);
            let mut res = DVector::<f64>::zeros(dim);
            let mut jac = DMatrix::<f64>::zeros(dim, dim);
            // unknowns: [x_s (ns), q (m), u (n)]
            let mut col = vec![0.0; m];
            let mut got = vec![0.0; n];
            for (e, &(i, j)) in support.iter().enumerate() {
                let v = values[(i, j)];
                res[e] = g[i] * v - q[j];
                jac[(e, ns + j)] = -1.0;
                jac[(e, ns + m + i)] = dg(i, u[i]) * v;
                col[j] += xs[e];
                got[i] += v * xs[e];
                jac[(ns + j, e)] = 1.0;
                jac[(ns + m + i, e)] = -v;
            }
            for j in 0..m {
                if valued[j] {
                    res[ns + j] = col[j] - 1.0;
                } else {
                    jac[(ns + j, ns + j)] = 1.0;
                    res[ns + j] = q[j];
                }
            }
            for i in 0..n {
                res[ns + m + i] = u[i] - got[i];
                jac[(ns + m + i, ns + m + i)] = 1.0;
            }
            let scale = q.iter().cloned().fold(1e-300, f64::max);
            let worst = (0..ns).map(|e| res[e].abs() / scale).fold(0.0, f64::max).max(
                (ns..dim).map(|r| res[r].abs()).fold(0.0, f64::max),
            );
            if worst < 1e-13 {
                converged = true;
                break;
            }
            let step = jac.lu().solve(&res)?;
            for e in 0..ns {
                xs[e] -= step[e];
            }
            for j in 0..m {
                q[j] -= step[ns + j];
            }
            for i in 0..n {
                u[i] -= step[ns + m + i];
                if !(u[i] > -f.w[i]) || !u[i].is_finite() {
                    return None;
                }
            }
        }
        if !converged {
            return None;
        }
        let mut next = Matrix::zeros(n, m);
        for (e, &(i, j)) in support.iter().enumerate() {
            next[(i, j)] = xs[e];
        }
        x = next;

        let most_negative = (0..ns).min_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        if let Some(e) = most_negative.filter(|&e| xs[e] < -1e-13) {
            let (i, j) = support.remove(e);
            if !support.iter().any(|&(_, s)| s == j) {
                return None;
            }
            x[(i, j)] = 0.0;
            u = f.utilities(&x);
            continue;
        }
        let g = f.weights(&u);
        let mut entering = None;
        let mut worst = 0.0;
        for i in 0..n {
            for j in 0..m {
                if values[(i, j)] > 0.0 && !support.contains(&(i, j)) {
                    let excess = (g[i] * values[(i, j)] - q[j]) / q[j].max(1e-300);
                    if excess > worst {
                        worst = excess;
                        entering = Some((i, j));
                    }
                }
            }
        }
        match entering {
            Some(pair) if worst > 1e-12 => support.push(pair),
            _ => {
                for v in x.as_mut_slice() {
                    *v = v.max(0.0);
                }
                for j in 0..m {
                    if !valued[j] {
                        x[(0, j)] = 1.0;
                        continue;
                    }
                    let s = x.col_sum(j);
                    if s <= 0.0 {
                        return None;
                    }
                    for i in 0..n {
                        x[(i, j)] /= s;
                    }
                }
                return Some(x);
            }
        }
    }
    None
}

/// Outcome of auditing one seller's gain from deviating at the competitive
/// equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct SellerDeviationReport {
    pub seller: usize,
    /// Revenue at the competitive equilibrium.
    pub ce_revenue: f64,
    /// Revenue of the best response to the other sellers' equilibrium play.
    pub best_revenue: f64,
    pub ratio: f64,
    pub best_utilities: Vec<f64>,
    pub gap: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Best-response revenue of `seller` when everyone else keeps its
/// competitive-equilibrium allocation, relative to its equilibrium revenue.
/// Opponent utilities below the floor are raised to it.
pub fn incentive_ratio(market: &ValidatedMarket, seller: usize, tol: f64) -> Result<SellerDeviationReport> {
    if market.num_sellers() < 2 {
        return Err(Error::Domain("the incentive ratio needs at least two sellers".into()));
    }
    let ce = solve_market_ce(market, &SolverOptions::default())?;
    incentive_ratio_at(market, &ce.utilities, &ce.split, seller, tol)
}

pub(crate) fn incentive_ratio_at(
    market: &ValidatedMarket,
    utilities: &Matrix,
    split: &Matrix,
    seller: usize,
    tol: f64,
) -> Result<SellerDeviationReport> {
    let floor = default_epsilon(market);
    let w: Vec<f64> = (0..market.num_buyers())
        .map(|i| (utilities.row_sum(i) - utilities[(i, seller)]).max(floor))
        .collect();
    let ce_revenue = split.col_sum(seller);
    let opts = BestResponseOptions::default();
    let br = seller_best_response(market, seller, &w, &opts)?;
    let ratio = br.revenue / ce_revenue;
    Ok(SellerDeviationReport {
        seller,
        ce_revenue,
        best_revenue: br.revenue,
        ratio,
        best_utilities: br.utilities,
        gap: br.gap,
        bound: SELLER_BOUND,
        pass: ratio <= SELLER_BOUND + tol && ratio >= 1.0 - tol && br.gap < opts.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_submarket, solve_submarket_boosted, verify_pacing, PacingOutcome};

    /// Checks a multiplier/boost pair against the allocation it should implement.
    fn implements(values: &Matrix, budgets: &[f64], alphas: Vec<f64>, boosts: &Matrix, target: &Matrix, tol: f64) -> bool {
        let out = PacingOutcome::from_parts(values, Some(boosts), alphas, target.clone());
        verify_pacing(&out, values, budgets, Some(boosts), tol).pass
    }

    fn crossed() -> Matrix {
        Matrix::from_nested(&[[2.0, 1.0], [1.0, 2.0]])
    }

    #[test]
    fn synthesized_boosts_implement_target() {
        let target = Matrix::from_nested(&[[1.0, 0.5], [0.0, 0.5]]);
        let (alphas, c) = synthesize_boosts(&crossed(), &[2.0, 2.0], &target).unwrap();
        assert!((alphas[0] - 0.8).abs() < 1e-15 && (alphas[1] - 2.0).abs() < 1e-15);
        assert!((c[(0, 1)] - 3.2).abs() < 1e-12 && c[(1, 1)] == 0.0 && c[(1, 0)] == 0.0);
        assert!(implements(&crossed(), &[2.0, 2.0], alphas, &c, &target, 1e-9));
        let out = solve_submarket_boosted(&crossed(), &[2.0, 2.0], &c, &SolverOptions::default()).unwrap();
        assert!((out.utilities[0] - 2.5).abs() < 1e-9 && (out.utilities[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equilibrium_target_needs_no_boost_on_winners() {
        let eq = solve_submarket(&crossed(), &[2.0, 2.0], &SolverOptions::default()).unwrap();
        let (_, c) = synthesize_boosts(&crossed(), &[2.0, 2.0], &eq.allocation).unwrap();
        for j in 0..2 {
            for i in 0..2 {
                if eq.allocation[(i, j)] > 0.0 {
                    assert!(c[(i, j)] < 1e-5, "{c:?}");
                }
            }
        }
    }

    #[test]
    fn infeasible_targets() {
        let starved = Matrix::from_nested(&[[1.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(
            synthesize_boosts(&crossed(), &[2.0, 2.0], &starved),
            Err(Error::InfeasibleTarget(_))
        ));
        let unsold = Matrix::from_nested(&[[0.5, 0.5], [0.0, 0.4]]);
        assert!(matches!(
            synthesize_boosts(&crossed(), &[2.0, 2.0], &unsold),
            Err(Error::InfeasibleTarget(_))
        ));
    }

    #[test]
    fn oracle_picks_weighted_argmax() {
        let v = Matrix::from_nested(&[[3.0, 1.0], [1.0, 4.0]]);
        assert_eq!(seller_linear_oracle(&v, &[1.0, 2.0]), vec![3.0, 4.0]);
        assert_eq!(seller_linear_oracle(&v, &[0.0, 0.0]), vec![4.0, 0.0]);
    }

    #[test]
    fn lone_buyer_takes_all() {
        let m = ValidatedMarket::from_parts(vec![1.0], vec![vec![2.0, 1.0]], vec![0, 1]);
        let eps = default_epsilon(&m);
        let br = seller_best_response(&m, 0, &[eps], &BestResponseOptions::default()).unwrap();
        assert!((br.utilities[0] - 2.0).abs() < 1e-12);
        assert!((br.revenue - 2.0 / (2.0 + eps)).abs() < 1e-12);
        assert!(matches!(
            seller_best_response(&m, 0, &[0.0], &BestResponseOptions::default()),
            Err(Error::EpsilonFloorViolated { .. })
        ));
    }

    #[test]
    fn best_response_beats_grid() {
        let v = Matrix::from_nested(&[[0.9, 0.2], [0.3, 0.8]]);
        let b = [1.0, 1.4];
        let w = [0.7, 0.4];
        let br = revenue_best_response(&v, &b, &w, &BestResponseOptions::default(), None);
        assert!(br.gap < 1e-7, "{}", br.gap);
        assert!(br.history.windows(2).all(|p| p[1] >= p[0] - 1e-15));
        let mut best: f64 = 0.0;
        let r = 400;
        for a in 0..=r {
            for c in 0..=r {
                let (x0, x1) = (a as f64 / r as f64, c as f64 / r as f64);
                let u = [0.9 * x0 + 0.2 * x1, 0.3 * (1.0 - x0) + 0.8 * (1.0 - x1)];
                best = best.max(revenue(&b, &u, &w));
            }
        }
        assert!(br.revenue >= best - 1e-12 && br.revenue - best < 1e-4);
    }

    #[test]
    fn symmetric_market_has_unit_ratio() {
        let m = ValidatedMarket::from_parts(vec![1.0, 1.0], vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![0, 1]);
        let r = incentive_ratio(&m, 0, 1e-6).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.ratio >= 1.0 - 1e-6);
    }
}
