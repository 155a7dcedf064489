//! Goodness-of-fit tests, empirical transforms and the two-point duality
//! test, all returning [`VerificationReport`]s.

mod duality;
mod gof;
mod transforms;

use serde::{Deserialize, Serialize};

pub use duality::{duality_two_point_test, tv_distance, Cellization, DualityOutcome, PairSample};
pub use gof::{
    chi_square_gof, histogram_chi_square, kolmogorov_pvalue, ks_statistic, ks_test, ks_two_sample,
};
pub use transforms::{empirical_char, empirical_laplace, mean_se, CharEstimate};

use crate::error::{Error, Result};

/// A finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::OutOfRange(format!("non-finite sample {bad}")));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.samples.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Outcome of one check, with enough provenance to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub statistic: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub n: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl VerificationReport {
    /// Passes iff `|statistic − target| ≤ tolerance`.
    pub fn within(name: impl Into<String>, statistic: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            target,
            tolerance,
            passed: (statistic - target).abs() <= tolerance,
            n: 0,
            seed: 0,
            dt: None,
            p_value: None,
            note: None,
        }
    }

    /// Passes iff `statistic ≤ threshold`.
    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        let mut r = Self::within(name, statistic, 0.0, threshold);
        r.passed = statistic <= threshold;
        r
    }

    /// Mean of `values` against `target` within three standard errors.
    pub fn three_sigma(name: impl Into<String>, values: &[f64], target: f64) -> Self {
        let (mean, se) = mean_se(values);
        let mut r = Self::within(name, mean, target, 3.0 * se + TARGET_SLACK);
        r.n = values.len();
        r.note = Some(format!("se = {se:.3e}"));
        r
    }

    pub fn with_provenance(mut self, n: usize, seed: u64, dt: Option<f64>) -> Self {
        self.n = n;
        self.seed = seed;
        self.dt = dt;
        self
    }

    pub fn with_p_value(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Flips the verdict; used for negative controls that must fail.
    pub fn expect_failure(mut self) -> Self {
        self.passed = !self.passed;
        self
    }
}

/// Allowance for the quadrature error in analytic targets of mean checks.
pub const TARGET_SLACK: f64 = 1e-9;
