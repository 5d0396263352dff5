//! Serializable result records shared by the checks and the CLI.

use serde::Serialize;

/// Outcome of a sampled residual check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub max_residual: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub passed: bool,
    pub order: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Observed convergence order from residuals at spacing `h` and `h / 2`.
pub fn convergence_order(coarse: f64, fine: f64) -> Option<f64> {
    if coarse > 0.0 && fine > 0.0 && coarse.is_finite() && fine.is_finite() {
        Some((coarse / fine).log2())
    } else {
        None
    }
}

/// Maximum absolute value, treating NaN as infinitely bad.
pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().map(|v| if v.is_nan() { f64::INFINITY } else { v.abs() }).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_quadratic_decay() {
        let o = convergence_order(4e-4, 1e-4).unwrap();
        assert!((o - 2.0).abs() < 1e-12);
        assert!(convergence_order(0.0, 1e-4).is_none());
    }

    #[test]
    fn nan_dominates_max() {
        assert_eq!(max_abs(&[1.0, -3.0]), 3.0);
        assert!(max_abs(&[1.0, f64::NAN]).is_infinite());
    }
}
