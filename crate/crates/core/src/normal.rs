//! Standard normal distribution helpers.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::SQRT_2;

use crate::error::{CareError, Result};

pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Inverse of [`cdf`] on `(0, 1)`.
pub fn quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CareError::InvalidArgument(format!("quantile level must lie in (0, 1), got {p}")));
    }
    Ok(-SQRT_2 * erfc_inv(2.0 * p))
}

/// Two-sided p-value `P(|N(0,1)| >= |z|)`. Depends on `|z|` only, so
/// `two_sided_p(z) == two_sided_p(-z)` exactly.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    erfc(z.abs() / SQRT_2).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((two_sided_p(1.959964) - 0.05).abs() < 1e-6);
        assert_eq!(two_sided_p(0.0), 1.0);
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((quantile(0.975).unwrap() - 1.959963984540054).abs() < 1e-9);
        assert!((quantile(0.995).unwrap() - 2.5758293035489004).abs() < 1e-9);
        assert!(quantile(0.0).is_err() && quantile(1.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-8, 0.001, 0.2, 0.5, 0.8, 0.999, 1.0 - 1e-8] {
            let x = quantile(p).unwrap();
            assert!((cdf(x) - p).abs() <= 1e-9 * p.max(1e-3), "p={p}");
        }
    }

    #[test]
    fn p_value_symmetry() {
        for &z in &[0.1, 1.0, 2.5, 7.0] {
            assert_eq!(two_sided_p(z), two_sided_p(-z));
        }
    }
}
