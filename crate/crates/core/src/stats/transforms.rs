use num_complex::Complex64;

use super::EmpiricalDistribution;
use crate::error::{domain, Result};

/// Sample mean and its standard error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    // Shifted by the first value, so constant samples give their value exactly.
    let x0 = values[0];
    let mean = x0 + values.iter().map(|v| v - x0).sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `E[e^{-λX}]` with its standard error.
pub fn empirical_laplace(emp: &EmpiricalDistribution, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return Err(domain("lambda must be > 0", lambda));
    }
    let v: Vec<f64> = emp.samples().iter().map(|x| (-lambda * x).exp()).collect();
    Ok(mean_se(&v))
}

/// Empirical characteristic function with per-component standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharEstimate {
    pub mean: Complex64,
    pub se_re: f64,
    pub se_im: f64,
}

impl CharEstimate {
    /// Both components within `k` standard errors of `target`.
    pub fn agrees(&self, target: Complex64, k: f64) -> bool {
        (self.mean.re - target.re).abs() <= k * self.se_re + super::TARGET_SLACK
            && (self.mean.im - target.im).abs() <= k * self.se_im + super::TARGET_SLACK
    }
}

/// `E[e^{iξX}]`.
pub fn empirical_char(emp: &EmpiricalDistribution, xi: f64) -> CharEstimate {
    let (re, im): (Vec<f64>, Vec<f64>) = emp
        .samples()
        .iter()
        .map(|x| {
            let (s, c) = (xi * x).sin_cos();
            (c, s)
        })
        .unzip();
    let (mr, sr) = mean_se(&re);
    let (mi, si) = mean_se(&im);
    CharEstimate {
        mean: Complex64::new(mr, mi),
        se_re: sr,
        se_im: si,
    }
}
