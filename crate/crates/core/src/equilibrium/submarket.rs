//! Plain first-price pacing equilibrium of a single seller's sub-market.
//!
//! Proportional response runs on per-item bids until the allocation reveals
//! which buyer-item pairs trade. The multipliers implied by a spanning forest
//! of those pairs are then computed exactly, and a max-flow certifies that the
//! resulting tight bids admit a clearing, budget-exhausting allocation. The
//! certified point is returned as soon as it passes the verifier; otherwise
//! proportional response keeps going.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_shapes, verify_pacing, PacingOutcome, Participants, SolverOptions};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::maxflow::FlowNetwork;

/// Where the inner proportional-response iteration starts.
#[derive(Debug, Clone, Copy, Default)]
pub enum InnerStart<'a> {
    /// Each buyer bids in proportion to its values.
    #[default]
    ValueProportional,
    /// Each buyer splits its budget evenly over the items it values.
    Uniform,
    /// Random positive bids drawn from the seed.
    Random(u64),
    /// Rescales the spending pattern of an earlier outcome to the new budgets.
    Warm(&'a PacingOutcome),
}

/// Solves the sub-market with default start. See [`solve_submarket_from`].
pub fn solve_submarket(values: &Matrix, budgets: &[f64], opts: &SolverOptions) -> Result<PacingOutcome> {
    solve_submarket_from(values, budgets, opts, InnerStart::default())
}

/// Computes the first-price pacing equilibrium of a sub-market with the given
/// per-buyer budgets.
///
/// Buyers with zero budget or no positive value sit out with zero utility.
/// Items no participant values stay unsold at price zero.
pub fn solve_submarket_from(
    values: &Matrix,
    budgets: &[f64],
    opts: &SolverOptions,
    start: InnerStart<'_>,
) -> Result<PacingOutcome> {
    check_shapes(values, budgets, None)?;
    let (n, m) = values.shape();
    let part = Participants::of(values, budgets);
    if part.buyers.is_empty() {
        let mut out = PacingOutcome::from_parts(values, None, vec![0.0; n], Matrix::zeros(n, m));
        out.prices = vec![0.0; m];
        return Ok(out);
    }

    let mut bids = initial_bids(values, budgets, &part, start);
    let warm = matches!(start, InnerStart::Warm(_));
    let mut next_polish = if warm { 0 } else { 4 };
    let mut x = Matrix::zeros(n, m);

    for it in 0..=opts.max_inner {
        allocation_from_bids(&bids, &part, &mut x);
        if it == next_polish || it == opts.max_inner {
            next_polish = (next_polish * 2).max(4);
            for threshold in [0.05, 1e-3, 1e-5, 1e-8] {
                if let Some(mut out) = polish(values, budgets, &part, &x, threshold) {
                    if verify_pacing(&out, values, budgets, None, opts.tol).pass {
                        out.iterations = it;
                        return Ok(out);
                    }
                }
            }
        }
        if it == opts.max_inner {
            break;
        }
        if warm && it == 0 {
            // the old spending pattern no longer fits; start over from values
            bids = initial_bids(values, budgets, &part, InnerStart::default());
            allocation_from_bids(&bids, &part, &mut x);
        }
        proportional_response_step(values, budgets, &part, &x, &mut bids);
    }

    let out = outcome_from_allocation(values, budgets, &part, x, opts.max_inner);
    let report = verify_pacing(&out, values, budgets, None, opts.tol);
    if report.pass {
        Ok(out)
    } else {
        Err(Error::NoConvergence {
            iterations: opts.max_inner,
            residual: report.max_residual(),
        })
    }
}

fn initial_bids(values: &Matrix, budgets: &[f64], part: &Participants, start: InnerStart<'_>) -> Matrix {
    let (n, m) = values.shape();
    let mut bids = Matrix::zeros(n, m);
    let mut rng = match start {
        InnerStart::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    for &i in &part.buyers {
        let weights: Vec<f64> = part
            .items
            .iter()
            .map(|&j| {
                let v = values[(i, j)];
                if v <= 0.0 {
                    return 0.0;
                }
                match (&start, rng.as_mut()) {
                    (InnerStart::Uniform, _) => 1.0,
                    (_, Some(r)) => 0.05 + r.random::<f64>(),
                    (InnerStart::Warm(prev), _) => {
                        let paid = prev.prices[j] * prev.allocation[(i, j)];
                        // keep every edge alive so a changed support is still reachable
                        paid.max(1e-9 * prev.spend[i].max(1e-300) * v)
                    }
                    _ => v,
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let fallback = total <= 0.0 || !total.is_finite();
        for (c, &j) in part.items.iter().enumerate() {
            let w = if fallback {
                if values[(i, j)] > 0.0 { values[(i, j)] } else { 0.0 }
            } else {
                weights[c]
            };
            bids[(i, j)] = w;
        }
        let s: f64 = bids.row(i).iter().sum();
        bids.row_mut(i).iter_mut().for_each(|b| *b *= budgets[i] / s);
    }
    bids
}

fn allocation_from_bids(bids: &Matrix, part: &Participants, x: &mut Matrix) {
    for &j in &part.items {
        let price: f64 = part.buyers.iter().map(|&i| bids[(i, j)]).sum();
        for &i in &part.buyers {
            x[(i, j)] = bids[(i, j)] / price;
        }
    }
}

/// One round of per-item proportional response: each buyer re-bids its budget
/// in proportion to the value each item delivered last round.
fn proportional_response_step(values: &Matrix, budgets: &[f64], part: &Participants, x: &Matrix, bids: &mut Matrix) {
    for &i in &part.buyers {
        let u: f64 = part.items.iter().map(|&j| values[(i, j)] * x[(i, j)]).sum();
        for &j in &part.items {
            bids[(i, j)] = budgets[i] * values[(i, j)] * x[(i, j)] / u;
        }
    }
}

fn outcome_from_allocation(
    values: &Matrix,
    budgets: &[f64],
    part: &Participants,
    x: Matrix,
    iterations: usize,
) -> PacingOutcome {
    let n = values.rows();
    let mut alphas = vec![0.0; n];
    for &i in &part.buyers {
        let u: f64 = part.items.iter().map(|&j| values[(i, j)] * x[(i, j)]).sum();
        alphas[i] = budgets[i] / u;
    }
    let mut out = PacingOutcome::from_parts(values, None, alphas, x);
    out.iterations = iterations;
    out
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = a;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// Exact multipliers from a spanning forest of the heaviest trading pairs,
/// certified by a max-flow over all tight pairs. Returns `None` when the
/// forest guess is inconsistent.
pub(crate) const DUST: f64 = 1e-12;

fn polish(
    values: &Matrix,
    budgets: &[f64],
    part: &Participants,
    x: &Matrix,
    threshold: f64,
) -> Option<PacingOutcome> {
    let (n, m) = values.shape();
    let nb = part.buyers.len();
    let ni = part.items.len();
    let total: f64 = part.buyers.iter().map(|&i| budgets[i]).sum();
    // Buyers this poor cannot move any price; they buy their best item at the
    // prices the others set.
    let dust: Vec<bool> = part.buyers.iter().map(|&i| budgets[i] < DUST * total).collect();
    // node ids: buyers 0..nb, items nb..nb+ni
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for (bi, &i) in part.buyers.iter().enumerate() {
        if dust[bi] {
            continue;
        }
        let top = part.items.iter().map(|&j| x[(i, j)]).fold(0.0, f64::max);
        for (ci, &j) in part.items.iter().enumerate() {
            if values[(i, j)] > 0.0 && (x[(i, j)] > threshold || x[(i, j)] > threshold.sqrt() * top) {
                edges.push((x[(i, j)], bi, ci));
            }
        }
    }
    edges.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut uf = UnionFind((0..nb + ni).collect());
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nb + ni];
    for &(_, bi, ci) in &edges {
        if uf.union(bi, nb + ci) {
            adj[bi].push(nb + ci);
            adj[nb + ci].push(bi);
        }
    }
    if (0..nb + ni).any(|u| adj[u].is_empty() && !(u < nb && dust[u])) {
        return None;
    }

    let mut alpha = vec![0.0; nb];
    let mut price = vec![0.0; ni];
    let mut seen = vec![false; nb + ni];
    for root in 0..nb {
        if seen[root] || dust[root] {
            continue;
        }
        let mut comp = vec![root];
        seen[root] = true;
        alpha[root] = 1.0;
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &w in &adj[u] {
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                if u < nb {
                    let (i, j) = (part.buyers[u], part.items[w - nb]);
                    price[w - nb] = alpha[u] * values[(i, j)];
                } else {
                    let (i, j) = (part.buyers[w], part.items[u - nb]);
                    alpha[w] = price[u - nb] / values[(i, j)];
                }
                comp.push(w);
            }
        }
        let budget: f64 = comp.iter().filter(|&&u| u < nb).map(|&u| budgets[part.buyers[u]]).sum();
        let paid: f64 = comp.iter().filter(|&&u| u >= nb).map(|&u| price[u - nb]).sum();
        let scale = budget / paid;
        if !(scale.is_finite() && scale > 0.0) {
            return None;
        }
        for &u in &comp {
            if u < nb {
                alpha[u] *= scale;
            } else {
                price[u - nb] *= scale;
            }
        }
    }

    let mut dust_choice = Vec::new();
    for (bi, &i) in part.buyers.iter().enumerate() {
        if !dust[bi] {
            continue;
        }
        let (ci, a) = part
            .items
            .iter()
            .enumerate()
            .filter(|&(_, &j)| values[(i, j)] > 0.0)
            .map(|(ci, &j)| (ci, price[ci] / values[(i, j)]))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        alpha[bi] = a;
        dust_choice.push((bi, ci));
    }

    const REL: f64 = 1e-10;
    let served: f64 = part
        .buyers
        .iter()
        .enumerate()
        .filter(|&(bi, _)| !dust[bi])
        .map(|(_, &i)| budgets[i])
        .sum();
    let mut net = FlowNetwork::new(nb + ni + 2, 1e-15 * total);
    let (s, t) = (nb + ni, nb + ni + 1);
    for (bi, &i) in part.buyers.iter().enumerate() {
        if !dust[bi] {
            net.add_edge(s, bi, budgets[i]);
        }
    }
    for ci in 0..ni {
        net.add_edge(nb + ci, t, price[ci]);
    }
    let mut arcs = Vec::new();
    for (bi, &i) in part.buyers.iter().enumerate() {
        for (ci, &j) in part.items.iter().enumerate() {
            let bid = alpha[bi] * values[(i, j)];
            if bid > price[ci] * (1.0 + REL) {
                return None;
            }
            if !dust[bi] && values[(i, j)] > 0.0 && bid >= price[ci] * (1.0 - REL) {
                arcs.push((bi, ci, net.add_edge(bi, nb + ci, 2.0 * total)));
            }
        }
    }
    let flow = net.max_flow(s, t);
    if flow < served * (1.0 - 1e-12) {
        return None;
    }

    let flows: Vec<f64> = arcs.iter().map(|&(_, _, e)| net.flow(e)).collect();
    let money = balance(budgets, part, &price, &arcs).unwrap_or(flows);
    let mut alloc = Matrix::zeros(n, m);
    for (&(bi, ci, _), pay) in arcs.iter().zip(money) {
        alloc[(part.buyers[bi], part.items[ci])] = pay / price[ci];
    }
    for (bi, ci) in dust_choice {
        let (i, j) = (part.buyers[bi], part.items[ci]);
        let share = budgets[i] / price[ci];
        let holder = (0..n).max_by(|&a, &b| alloc[(a, j)].total_cmp(&alloc[(b, j)]))?;
        if alloc[(holder, j)] < share {
            return None;
        }
        alloc[(holder, j)] -= share;
        alloc[(i, j)] = share;
    }
    let mut alphas = vec![0.0; n];
    for (bi, &i) in part.buyers.iter().enumerate() {
        alphas[i] = alpha[bi];
    }
    Some(PacingOutcome::from_parts(values, None, alphas, alloc))
}

/// Spending on tight pairs with row sums `B_i` and column sums `p_j` that
/// spreads money as evenly as the tight pairs allow (matrix scaling of the
/// all-ones pattern). `None` when the scaling does not settle, which happens
/// when some tight pair can carry no money in any feasible spending.
fn balance(budgets: &[f64], part: &Participants, price: &[f64], arcs: &[(usize, usize, usize)]) -> Option<Vec<f64>> {
    let nb = part.buyers.len();
    let mut money = vec![1.0; arcs.len()];
    let mut row = vec![0.0; nb];
    let mut col = vec![0.0; price.len()];
    for _ in 0..500 {
        row.iter_mut().for_each(|r| *r = 0.0);
        for (&(bi, _, _), &x) in arcs.iter().zip(&money) {
            row[bi] += x;
        }
        for (&(bi, _, _), x) in arcs.iter().zip(money.iter_mut()) {
            *x *= budgets[part.buyers[bi]] / row[bi];
        }
        col.iter_mut().for_each(|c| *c = 0.0);
        for (&(_, ci, _), &x) in arcs.iter().zip(&money) {
            col[ci] += x;
        }
        let mut err: f64 = 0.0;
        for (ci, &c) in col.iter().enumerate() {
            err = err.max((c - price[ci]).abs() / price[ci]);
        }
        for (&(_, ci, _), x) in arcs.iter().zip(money.iter_mut()) {
            *x *= price[ci] / col[ci];
        }
        if err < 1e-14 {
            return Some(money);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::verify_pacing;

    fn crossed() -> Matrix {
        Matrix::from_nested(&[[2.0, 1.0], [1.0, 2.0]])
    }

    #[test]
    fn crossed_pair_equal_budgets() {
        let out = solve_submarket(&crossed(), &[2.0, 2.0], &SolverOptions::default()).unwrap();
        for (a, b) in out.utilities.iter().zip([2.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in out.prices.iter().zip([2.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in out.alphas.iter().zip([1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(out.allocation.max_abs_diff(&Matrix::from_nested(&[[1.0, 0.0], [0.0, 1.0]])) < 1e-12);
    }

    #[test]
    fn identical_buyers_split_evenly() {
        let v = Matrix::from_nested(&[[1.0, 1.0], [1.0, 1.0]]);
        let out = solve_submarket(&v, &[1.0, 1.0], &SolverOptions::default()).unwrap();
        assert!(out.allocation.iter().all(|&x| (x - 0.5).abs() < 1e-12), "{:?}", out.allocation);
    }

    #[test]
    fn lone_buyer_takes_everything() {
        let v = Matrix::from_nested(&[[3.0, 1.0]]);
        let out = solve_submarket(&v, &[4.0], &SolverOptions::default()).unwrap();
        assert!((out.alphas[0] - 1.0).abs() < 1e-12);
        assert!((out.prices[0] - 3.0).abs() < 1e-12 && (out.prices[1] - 1.0).abs() < 1e-12);
        assert!((out.utilities[0] - 4.0).abs() < 1e-12);
        assert!((out.allocation[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rich_second_buyer() {
        let out = solve_submarket(&crossed(), &[2.0, 10.0], &SolverOptions::default()).unwrap();
        assert!((out.utilities[1] - 2.5).abs() < 1e-9);
    }

    #[test]
    fn degenerate_tie_at_kink() {
        // b = 1 and b = 4 are the kinks of the crossed-pair curve: a tight
        // pair carries no trade there.
        for b in [1.0, 4.0] {
            let out = solve_submarket(&crossed(), &[2.0, b], &SolverOptions::default()).unwrap();
            assert!((out.utilities[1] - 2.0).abs() < 1e-9, "b={b}: {:?}", out.utilities);
        }
    }

    #[test]
    fn zero_budget_buyer_sits_out() {
        let out = solve_submarket(&crossed(), &[2.0, 0.0], &SolverOptions::default()).unwrap();
        assert_eq!(out.utilities[1], 0.0);
        assert_eq!(out.alphas[1], 0.0);
        assert!((out.utilities[0] - 3.0).abs() < 1e-12);
        assert!((out.alphas[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unvalued_item_unsold() {
        let v = Matrix::from_nested(&[[1.0, 0.0], [1.0, 2.0]]);
        let out = solve_submarket(&v, &[1.0, 0.0], &SolverOptions::default()).unwrap();
        assert_eq!(out.allocation.col_sum(1), 0.0);
        assert_eq!(out.prices[1], 0.0);
    }

    #[test]
    fn starts_agree() {
        let v = Matrix::from_nested(&[[0.3, 0.9, 0.1], [0.8, 0.2, 0.5], [0.4, 0.4, 0.9]]);
        let b = [1.0, 0.7, 1.3];
        let o = SolverOptions::default();
        let a = solve_submarket_from(&v, &b, &o, InnerStart::ValueProportional).unwrap();
        let u = solve_submarket_from(&v, &b, &o, InnerStart::Uniform).unwrap();
        let r = solve_submarket_from(&v, &b, &o, InnerStart::Random(3)).unwrap();
        let w = solve_submarket_from(&v, &[1.1, 0.6, 1.3], &o, InnerStart::Warm(&a)).unwrap();
        for i in 0..3 {
            assert!((a.utilities[i] - u.utilities[i]).abs() < 1e-8);
            assert!((a.utilities[i] - r.utilities[i]).abs() < 1e-8);
        }
        assert!(verify_pacing(&w, &v, &[1.1, 0.6, 1.3], None, 1e-9).pass);
    }

    #[test]
    fn unreachable_tolerance_reports_no_convergence() {
        let o = SolverOptions { tol: -1.0, max_inner: 10 };
        let v = Matrix::from_nested(&[[0.3, 0.9], [0.8, 0.2]]);
        match solve_submarket(&v, &[1.0, 1.0], &o) {
            Err(Error::NoConvergence { iterations: 10, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
