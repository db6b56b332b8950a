use std::path::PathBuf;

/// A single violated market invariant reported by [`crate::market::validate`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("buyer {buyer} has non-positive budget {budget}")]
    ZeroBudget { buyer: usize, budget: f64 },
    #[error("item {item} has no buyer with positive value")]
    OrphanItem { item: usize },
    #[error("seller {seller} owns no items")]
    EmptySellerGroup { seller: usize },
    #[error("{0}")]
    Shape(String),
    #[error("value v[{buyer}][{item}] = {value} is negative or not finite")]
    BadValue { buyer: usize, item: usize, value: f64 },
    #[error("boost c[{buyer}][{item}] = {value} is negative or not finite")]
    BadBoost { buyer: usize, item: usize, value: f64 },
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid market: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("infeasible shape: {0}")]
    InfeasibleShape(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("utility of buyer {buyer} is not positive ({value})")]
    NonPositiveUtility { buyer: usize, value: f64 },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("buyer {buyer} values no item")]
    BuyerValuesNothing { buyer: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("infeasible target allocation: {0}")]
    InfeasibleTarget(String),
    #[error("epsilon floor violated for buyer {buyer} at seller {seller}: {value:e} < {floor:e}")]
    EpsilonFloorViolated {
        buyer: usize,
        seller: usize,
        value: f64,
        floor: f64,
    },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
