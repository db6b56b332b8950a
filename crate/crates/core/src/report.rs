//! Machine-readable reports shared by the command-line tool and the examples.
//! Reals use Rust's shortest round-trip formatting, so equal runs produce
//! equal bytes.

use std::fmt::Write;

use serde::Serialize;

use crate::equilibrium::{verify_pacing, MarketEquilibrium, PacingReport};
use crate::incentives::{BuyerDeviationReport, SellerDeviationReport};
use crate::market::ValidatedMarket;
use crate::matrix::Matrix;
use crate::seller_game::PneAudit;

pub const AUDIT_HEADER: &str = "agent,baseline_value,best_response_value,ratio,bound,pass";

/// One agent's deviation audit: what it gets by following the market rule
/// and what its best deviation achieves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub agent: usize,
    pub baseline_value: f64,
    pub best_response_value: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

impl From<&BuyerDeviationReport> for AuditRow {
    fn from(r: &BuyerDeviationReport) -> Self {
        Self {
            agent: r.buyer,
            baseline_value: r.equalized.utility,
            best_response_value: r.best_utility,
            ratio: r.ratio,
            bound: r.bound,
            pass: r.pass,
        }
    }
}

impl From<&SellerDeviationReport> for AuditRow {
    fn from(r: &SellerDeviationReport) -> Self {
        Self {
            agent: r.seller,
            baseline_value: r.ce_revenue,
            best_response_value: r.best_revenue,
            ratio: r.ratio,
            bound: r.bound,
            pass: r.pass,
        }
    }
}

pub fn audit_csv(rows: &[AuditRow]) -> String {
    let mut out = format!("{AUDIT_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.agent, r.baseline_value, r.best_response_value, r.ratio, r.bound, r.pass
        );
    }
    out
}

pub const PNE_HEADER: &str = "seller,buyer,utility,revenue";

/// One row per (seller, buyer) with the utility the seller delivers and the
/// money it receives, `B_i u_i(k) / u_i(K)`; then a blank line and a
/// `key,value` summary block.
pub fn pne_csv(market: &ValidatedMarket, audit: &PneAudit) -> String {
    let u = &audit.solution.profile.utilities;
    let totals = u.totals();
    let mut out = format!("{PNE_HEADER}\n");
    for k in 0..market.num_sellers() {
        for i in 0..market.num_buyers() {
            let revenue = market.budget(i) * u[(i, k)] / totals[i];
            let _ = writeln!(out, "{k},{i},{},{revenue}", u[(i, k)]);
        }
    }
    out.push_str("\nkey,value\n");
    let f = &audit.fairness;
    for (key, value) in [
        ("delta", f.delta),
        ("nsw_pne", f.nsw_pne),
        ("nsw_ce", f.nsw_ce),
        ("nsw_ratio", f.ratio),
        ("bound", f.bound),
        ("restart_spread", audit.spread),
        ("tol", audit.tol),
    ] {
        let _ = writeln!(out, "{key},{value}");
    }
    for (k, d) in audit.verified.improvements.iter().enumerate() {
        let _ = writeln!(out, "improvement_{k},{d}");
    }
    let _ = writeln!(out, "pass,{}", audit.pass());
    out
}

/// Equilibrium of a whole market with its verification residuals.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub prices: Vec<f64>,
    pub alphas: Vec<f64>,
    pub allocation: Vec<Vec<f64>>,
    /// Per-buyer total utility.
    pub utilities: Vec<f64>,
    /// `utility_by_seller[i][k]`: value buyer `i` receives from seller `k`.
    pub utility_by_seller: Vec<Vec<f64>>,
    /// `budget_split[i][k]`: money buyer `i` pays seller `k`.
    pub budget_split: Vec<Vec<f64>>,
    pub residuals: PacingReport,
}

impl EquilibriumReport {
    pub fn new(market: &ValidatedMarket, eq: &MarketEquilibrium, boosts: Option<&Matrix>, tol: f64) -> Self {
        let out = &eq.outcome;
        Self {
            prices: out.prices.clone(),
            alphas: out.alphas.clone(),
            allocation: out.allocation.to_rows(),
            utilities: out.utilities.clone(),
            utility_by_seller: eq.utilities.to_rows(),
            budget_split: eq.split.to_rows(),
            residuals: verify_pacing(out, market.values(), market.budgets(), boosts, tol),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Aligned text for a terminal.
    pub fn summary(&self) -> String {
        let mut out = String::from("item  price\n");
        for (j, p) in self.prices.iter().enumerate() {
            let _ = writeln!(out, "{j:<5} {p:.9}");
        }
        out.push_str("\nbuyer  alpha        utility\n");
        for (i, (a, u)) in self.alphas.iter().zip(&self.utilities).enumerate() {
            let _ = writeln!(out, "{i:<6} {a:<12.9} {u:.9}");
        }
        let _ = writeln!(
            out,
            "\nmax residual {:e} (tol {:e}): {}",
            self.residuals.max_residual(),
            self.residuals.tol,
            if self.residuals.pass { "verified" } else { "NOT verified" }
        );
        out
    }
}
