//! Deterministic random market instances.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::error::{Error, Result};
use crate::market::MarketSpec;

/// How entries of the valuation matrix are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueDistribution {
    /// Uniform on [0, 1).
    Uniform01,
    /// exp(N(0, 1)).
    LogNormal,
    /// Zero with the given probability, otherwise uniform on [0, 1).
    Sparse(f64),
}

impl fmt::Display for ValueDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform01 => write!(f, "uniform01"),
            Self::LogNormal => write!(f, "lognormal"),
            Self::Sparse(p) => write!(f, "sparse({p})"),
        }
    }
}

impl FromStr for ValueDistribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform01" | "uniform" => Ok(Self::Uniform01),
            "lognormal" => Ok(Self::LogNormal),
            _ => {
                let p = s
                    .strip_prefix("sparse(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| s.strip_prefix("sparse:"))
                    .ok_or_else(|| format!("unknown distribution `{s}`"))?;
                let p: f64 = p.parse().map_err(|e| format!("bad sparsity `{p}`: {e}"))?;
                if !(0.0..1.0).contains(&p) {
                    return Err(format!("sparsity must lie in [0, 1), got {p}"));
                }
                Ok(Self::Sparse(p))
            }
        }
    }
}

impl ValueDistribution {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Self::Uniform01 => rng.random::<f64>(),
            Self::LogNormal => LogNormal::new(0.0, 1.0).unwrap().sample(rng),
            Self::Sparse(p) => {
                if rng.random::<f64>() < p {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            }
        }
    }
}

/// Budgets are drawn uniformly from this range.
pub const BUDGET_RANGE: (f64, f64) = (0.5, 1.5);

/// Draws a market with `n` buyers, `m` items and `k` sellers.
///
/// The output depends only on the arguments. All-zero item columns (and
/// all-zero buyer rows) are redrawn, and items are dealt to sellers
/// round-robin before the assignment is shuffled, so no seller is empty.
pub fn generate(
    seed: u64,
    n: usize,
    m: usize,
    k: usize,
    dist: ValueDistribution,
) -> Result<MarketSpec> {
    if n == 0 || m == 0 || k == 0 {
        return Err(Error::InfeasibleShape(format!(
            "need at least one buyer, item and seller (got n={n}, m={m}, K={k})"
        )));
    }
    if m < k {
        return Err(Error::InfeasibleShape(format!(
            "{m} items cannot cover {k} sellers"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budgets: Vec<f64> = (0..n)
        .map(|_| rng.random_range(BUDGET_RANGE.0..BUDGET_RANGE.1))
        .collect();
    let mut values: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| dist.sample(&mut rng)).collect())
        .collect();

    loop {
        let mut clean = true;
        for j in 0..m {
            if values.iter().all(|row| row[j] <= 0.0) {
                clean = false;
                for row in values.iter_mut() {
                    row[j] = dist.sample(&mut rng);
                }
            }
        }
        for row in values.iter_mut() {
            if row.iter().all(|&v| v <= 0.0) {
                clean = false;
                for v in row.iter_mut() {
                    *v = dist.sample(&mut rng);
                }
            }
        }
        if clean {
            break;
        }
    }

    let mut seller_of: Vec<usize> = (0..m).map(|j| j % k).collect();
    seller_of.shuffle(&mut rng);

    Ok(MarketSpec::new(budgets, values, seller_of))
}

/// Random non-negative boosts, uniform on [0, scale).
pub fn generate_boosts(seed: u64, n: usize, m: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_b005);
    (0..n)
        .map(|_| (0..m).map(|_| scale * rng.random::<f64>()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::validate;

    #[test]
    fn deterministic_in_seed() {
        let a = generate(7, 3, 4, 2, ValueDistribution::Uniform01).unwrap();
        let b = generate(7, 3, 4, 2, ValueDistribution::Uniform01).unwrap();
        assert_eq!(a, b);
        let bits = |s: &MarketSpec| {
            s.values
                .iter()
                .flatten()
                .chain(&s.budgets)
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        let c = generate(8, 3, 4, 2, ValueDistribution::Uniform01).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn fewer_items_than_sellers() {
        assert!(matches!(
            generate(7, 2, 1, 2, ValueDistribution::Uniform01),
            Err(Error::InfeasibleShape(_))
        ));
    }

    #[test]
    fn sparse_columns_never_empty() {
        for seed in 0..1000 {
            let s = generate(seed, 2, 2, 1, ValueDistribution::Sparse(0.9)).unwrap();
            for j in 0..2 {
                assert!(s.values.iter().any(|r| r[j] > 0.0), "seed {seed} item {j}");
            }
            validate(&s).unwrap();
        }
    }

    #[test]
    fn parses_distribution_names() {
        assert_eq!("uniform01".parse(), Ok(ValueDistribution::Uniform01));
        assert_eq!("lognormal".parse(), Ok(ValueDistribution::LogNormal));
        assert_eq!("sparse(0.25)".parse(), Ok(ValueDistribution::Sparse(0.25)));
        assert!("sparse(1.5)".parse::<ValueDistribution>().is_err());
        assert!("gamma".parse::<ValueDistribution>().is_err());
    }
}
