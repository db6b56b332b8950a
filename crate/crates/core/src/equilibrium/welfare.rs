use crate::error::{Error, Result};

/// Σ_i B_i ln u_i.
pub fn eg_objective(budgets: &[f64], utilities: &[f64]) -> Result<f64> {
    if budgets.len() != utilities.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} budgets, {} utilities",
            budgets.len(),
            utilities.len()
        )));
    }
    let mut total = 0.0;
    for (i, (&b, &u)) in budgets.iter().zip(utilities).enumerate() {
        if !(u > 0.0) {
            return Err(Error::NonPositiveUtility { buyer: i, value: u });
        }
        total += b * u.ln();
    }
    Ok(total)
}

/// Budget-weighted geometric mean Π_i u_i^{B_i/B}, computed in the log domain.
pub fn nsw(budgets: &[f64], utilities: &[f64]) -> Result<f64> {
    let total: f64 = budgets.iter().sum();
    Ok((eg_objective(budgets, utilities)? / total).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_values() {
        assert_eq!(eg_objective(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        let v = eg_objective(&[2.0, 2.0], &[2.0, 2.0]).unwrap();
        assert!((v - 4.0 * 2f64.ln()).abs() < 1e-15);
        assert!(matches!(
            eg_objective(&[1.0, 1.0], &[1.0, 0.0]),
            Err(Error::NonPositiveUtility { buyer: 1, .. })
        ));
    }

    #[test]
    fn geometric_mean() {
        assert!((nsw(&[1.0, 1.0], &[4.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!((nsw(&[1.0, 3.0], &[16.0, 16.0]).unwrap() - 16.0).abs() < 1e-12);
        assert!(nsw(&[1.0], &[-1.0]).is_err());
    }
}
