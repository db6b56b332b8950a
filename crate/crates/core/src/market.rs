//! Market data model.
//!
//! A [`MarketSpec`] is the raw, serializable description of a linear Fisher
//! market whose items are partitioned among sellers. [`validate`] checks the
//! invariants and produces a [`ValidatedMarket`] that every solver consumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::matrix::Matrix;

/// Buyers' budgets, the valuation matrix and the item-to-seller map.
///
/// Every item has one unit of supply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSpec {
    pub budgets: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub seller_of: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boosts: Option<Vec<Vec<f64>>>,
}

impl MarketSpec {
    pub fn new(budgets: Vec<f64>, values: Vec<Vec<f64>>, seller_of: Vec<usize>) -> Self {
        Self {
            budgets,
            values,
            seller_of,
            boosts: None,
        }
    }

    pub fn with_boosts(mut self, boosts: Vec<Vec<f64>>) -> Self {
        self.boosts = Some(boosts);
        self
    }
}

/// A market whose invariants hold, plus derived index structures.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedMarket {
    spec: MarketSpec,
    values: Matrix,
    boosts: Option<Matrix>,
    total_budget: f64,
    groups: Vec<Vec<usize>>,
    valued_sellers: Vec<Vec<usize>>,
}

/// Checks every [`MarketSpec`] invariant, collecting all violations.
pub fn validate(spec: &MarketSpec) -> Result<ValidatedMarket> {
    let mut violations = Vec::new();
    let n = spec.budgets.len();
    let m = spec.seller_of.len();

    if n == 0 {
        violations.push(Violation::Shape("market has no buyers".into()));
    }
    if m == 0 {
        violations.push(Violation::Shape("market has no items".into()));
    }
    if spec.values.len() != n {
        violations.push(Violation::Shape(format!(
            "values has {} rows for {n} buyers",
            spec.values.len()
        )));
    }
    for (i, row) in spec.values.iter().enumerate() {
        if row.len() != m {
            violations.push(Violation::Shape(format!(
                "values row {i} has {} entries for {m} items",
                row.len()
            )));
        }
    }
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }

    for (buyer, &budget) in spec.budgets.iter().enumerate() {
        if !(budget > 0.0 && budget.is_finite()) {
            violations.push(Violation::ZeroBudget { buyer, budget });
        }
    }
    for (buyer, row) in spec.values.iter().enumerate() {
        for (item, &value) in row.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                violations.push(Violation::BadValue { buyer, item, value });
            }
        }
    }
    for item in 0..m {
        if !spec.values.iter().any(|row| row[item] > 0.0) {
            violations.push(Violation::OrphanItem { item });
        }
    }

    let num_sellers = spec.seller_of.iter().max().map_or(0, |&k| k + 1);
    let mut groups = vec![Vec::new(); num_sellers];
    for (item, &k) in spec.seller_of.iter().enumerate() {
        groups[k].push(item);
    }
    for (seller, g) in groups.iter().enumerate() {
        if g.is_empty() {
            violations.push(Violation::EmptySellerGroup { seller });
        }
    }

    let boosts = match &spec.boosts {
        None => None,
        Some(rows) => match Matrix::from_rows(rows.clone()) {
            Ok(c) if c.shape() == (n, m) => {
                for i in 0..n {
                    for j in 0..m {
                        let value = c[(i, j)];
                        if !(value >= 0.0 && value.is_finite()) {
                            violations.push(Violation::BadBoost {
                                buyer: i,
                                item: j,
                                value,
                            });
                        }
                    }
                }
                Some(c)
            }
            _ => {
                violations.push(Violation::Shape(format!("boosts must be a {n}x{m} matrix")));
                None
            }
        },
    };

    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }

    let values = Matrix::from_rows(spec.values.clone())?;
    let valued_sellers = (0..n)
        .map(|i| {
            (0..num_sellers)
                .filter(|&k| groups[k].iter().any(|&j| values[(i, j)] > 0.0))
                .collect()
        })
        .collect();

    Ok(ValidatedMarket {
        spec: spec.clone(),
        values,
        boosts,
        total_budget: spec.budgets.iter().sum(),
        groups,
        valued_sellers,
    })
}

impl ValidatedMarket {
    pub fn spec(&self) -> &MarketSpec {
        &self.spec
    }

    pub fn num_buyers(&self) -> usize {
        self.spec.budgets.len()
    }

    pub fn num_items(&self) -> usize {
        self.spec.seller_of.len()
    }

    pub fn num_sellers(&self) -> usize {
        self.groups.len()
    }

    pub fn budgets(&self) -> &[f64] {
        &self.spec.budgets
    }

    pub fn budget(&self, buyer: usize) -> f64 {
        self.spec.budgets[buyer]
    }

    pub fn total_budget(&self) -> f64 {
        self.total_budget
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    /// Boosts carried by the market file, if any.
    pub fn boosts(&self) -> Option<&Matrix> {
        self.boosts.as_ref()
    }

    pub fn seller_of(&self, item: usize) -> usize {
        self.spec.seller_of[item]
    }

    /// Items owned by `seller`, in increasing index order.
    pub fn items_of(&self, seller: usize) -> &[usize] {
        &self.groups[seller]
    }

    /// Sellers owning at least one item the buyer values positively.
    pub fn valued_sellers(&self, buyer: usize) -> &[usize] {
        &self.valued_sellers[buyer]
    }

    /// The valuation sub-matrix of one seller's items (n × |J_k|).
    pub fn seller_values(&self, seller: usize) -> Matrix {
        self.values.select_columns(&self.groups[seller])
    }

    pub fn seller_boosts(&self, boosts: &Matrix, seller: usize) -> Matrix {
        boosts.select_columns(&self.groups[seller])
    }

    /// Σ_{j∈J_k} v_ij: the utility of owning all of seller k's items.
    pub fn seller_value_total(&self, buyer: usize, seller: usize) -> f64 {
        self.groups[seller]
            .iter()
            .map(|&j| self.values[(buyer, j)])
            .sum()
    }

    /// Builds a market directly, panicking on invalid input. Handy for fixtures.
    pub fn from_parts(budgets: Vec<f64>, values: Vec<Vec<f64>>, seller_of: Vec<usize>) -> Self {
        validate(&MarketSpec::new(budgets, values, seller_of)).expect("valid market")
    }

    /// Checks that a boost matrix fits this market and is non-negative.
    pub fn check_boosts(&self, boosts: &Matrix) -> Result<()> {
        if boosts.shape() != (self.num_buyers(), self.num_items()) {
            return Err(Error::ShapeMismatch(format!(
                "boosts are {:?}, market is {}x{}",
                boosts.shape(),
                self.num_buyers(),
                self.num_items()
            )));
        }
        if boosts.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
            return Err(Error::Domain("boosts must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Per-buyer, per-seller money: `split[(i, k)] = B_i(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetSplit(pub Matrix);

/// Per-buyer, per-seller utilities: `u[(i, k)] = u_i(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityMatrix(pub Matrix);

macro_rules! matrix_newtype {
    ($t:ty) => {
        impl std::ops::Deref for $t {
            type Target = Matrix;
            fn deref(&self) -> &Matrix {
                &self.0
            }
        }

        impl std::ops::DerefMut for $t {
            fn deref_mut(&mut self) -> &mut Matrix {
                &mut self.0
            }
        }
    };
}

matrix_newtype!(BudgetSplit);
matrix_newtype!(UtilityMatrix);

impl BudgetSplit {
    /// Largest deviation of a row sum from the buyer's budget.
    pub fn max_row_error(&self, budgets: &[f64]) -> f64 {
        budgets
            .iter()
            .enumerate()
            .map(|(i, b)| (self.row_sum(i) - b).abs())
            .fold(0.0, f64::max)
    }

    /// Budgets submitted to one seller, one entry per buyer.
    pub fn seller_budgets(&self, seller: usize) -> Vec<f64> {
        self.column(seller).collect()
    }
}

impl UtilityMatrix {
    /// u_i(K) for every buyer.
    pub fn totals(&self) -> Vec<f64> {
        (0..self.rows()).map(|i| self.row_sum(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crossed() -> MarketSpec {
        MarketSpec::new(vec![2.0, 2.0], vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![0, 0])
    }

    #[test]
    fn crossed_pair_is_valid() {
        let m = validate(&crossed()).unwrap();
        assert_eq!(m.num_sellers(), 1);
        assert_eq!(m.items_of(0), &[0, 1]);
        assert_eq!(m.total_budget(), 4.0);
        assert_eq!(m.valued_sellers(1), &[0]);
    }

    #[test]
    fn orphan_item_rejected() {
        let mut s = crossed();
        s.values[0][1] = 0.0;
        s.values[1][1] = 0.0;
        match validate(&s) {
            Err(Error::Invalid(v)) => assert_eq!(v, vec![Violation::OrphanItem { item: 1 }]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_budget_rejected() {
        let mut s = crossed();
        s.budgets[0] = 0.0;
        match validate(&s) {
            Err(Error::Invalid(v)) => {
                assert!(matches!(v[0], Violation::ZeroBudget { buyer: 0, .. }))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gap_in_seller_indices_is_an_empty_group() {
        let mut s = crossed();
        s.seller_of = vec![0, 2];
        match validate(&s) {
            Err(Error::Invalid(v)) => assert_eq!(v, vec![Violation::EmptySellerGroup { seller: 1 }]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_values_rejected() {
        let mut s = crossed();
        s.values[1].pop();
        assert!(matches!(validate(&s), Err(Error::Invalid(_))));
    }

    #[test]
    fn negative_boost_rejected() {
        let s = crossed().with_boosts(vec![vec![0.0, -1.0], vec![0.0, 0.0]]);
        assert!(matches!(validate(&s), Err(Error::Invalid(_))));
    }
}
