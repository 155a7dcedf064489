//! Two-point duality test: the law of `(X̃_0, X̃_t)` against the law of
//! `(X⁺_t, X⁺_0)`, both started from `μ⁺`, compared on a grid of cells by
//! total variation, with a bootstrap null.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::VerificationReport;
use crate::error::{domain, Result};
use crate::params::ModelParams;
use crate::reversal::{x_tilde_pairs, Start};
use crate::rng::{sub_seed, Domain, RngStreamSpec};
use crate::simulate::{par_paths, stationary_pairs};

pub use crate::simulate::PairSample;

/// Square grid of `cells × cells` on `[lo, hi)²`, plus one overflow row and
/// column for points at or above `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cellization {
    pub cells: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for Cellization {
    fn default() -> Self {
        Self {
            cells: 20,
            lo: 0.0,
            hi: 4.0,
        }
    }
}

impl Cellization {
    fn side(&self) -> usize {
        self.cells + 1
    }

    fn index(&self, x: f64) -> usize {
        let w = (self.hi - self.lo) / self.cells as f64;
        (((x - self.lo) / w).floor().max(0.0) as usize).min(self.cells)
    }

    /// Cell counts of a pair sample, row = start, column = end.
    pub fn histogram(&self, s: &PairSample) -> Vec<u64> {
        let m = self.side();
        let mut h = vec![0u64; m * m];
        for (&a, &b) in s.start.iter().zip(&s.end) {
            h[self.index(a) * m + self.index(b)] += 1;
        }
        h
    }

    fn coarser(&self) -> Option<Self> {
        (self.cells >= 4).then_some(Self {
            cells: self.cells / 2,
            ..*self
        })
    }
}

fn tv_counts(a: &[u64], na: f64, b: &[u64], nb: f64) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
        .sum::<f64>()
}

/// Total variation between the normalised cell histograms of two samples.
pub fn tv_distance(a: &PairSample, b: &PairSample, cells: &Cellization) -> f64 {
    tv_counts(
        &cells.histogram(a),
        a.len() as f64,
        &cells.histogram(b),
        b.len() as f64,
    )
}

/// Largest share of cells allowed below five expected points before the
/// grid is coarsened.
const SPARSE_SHARE: f64 = 0.2;
const BOOTSTRAP_REPS: usize = 200;
const NULL_QUANTILE: f64 = 0.99;

/// Halves the grid until at most a fifth of the cells expect fewer than
/// five points in a sample of size `n`.
fn settle_cells(pooled: &[&PairSample], n: usize, start: Cellization) -> Cellization {
    let mut c = start;
    loop {
        let total: usize = pooled.iter().map(|s| s.len()).sum();
        let mut h = vec![0u64; c.side() * c.side()];
        for s in pooled {
            for (acc, v) in h.iter_mut().zip(c.histogram(s)) {
                *acc += v;
            }
        }
        let sparse = h
            .iter()
            .filter(|&&k| (k as f64) * (n as f64) / (total as f64) < 5.0)
            .count();
        if (sparse as f64) <= SPARSE_SHARE * h.len() as f64 {
            return c;
        }
        match c.coarser() {
            Some(next) => c = next,
            None => return c,
        }
    }
}

fn multinomial(n: u64, probs: &[f64], rng: &mut impl rand::Rng) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    probs
        .iter()
        .map(|&p| {
            if left == 0 || mass <= 0.0 {
                return 0;
            }
            let q = (p / mass).clamp(0.0, 1.0);
            let k = Binomial::new(left, q).map(|b| b.sample(rng)).unwrap_or(0);
            left -= k;
            mass -= p;
            k
        })
        .collect()
}

/// TV between `a` and `b` with the 99th percentile of the TV between two
/// samples of the same sizes drawn from the pooled cell frequencies.
fn tv_against_null(
    name: &str,
    a: &PairSample,
    b: &PairSample,
    cells: Cellization,
    seed: u64,
) -> VerificationReport {
    let cells = settle_cells(&[a, b], a.len().min(b.len()), cells);
    let (ha, hb) = (cells.histogram(a), cells.histogram(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let tv = tv_counts(&ha, na, &hb, nb);
    let total = na + nb;
    let probs: Vec<f64> = ha
        .iter()
        .zip(&hb)
        .map(|(&x, &y)| (x + y) as f64 / total)
        .collect();
    let mut null = par_paths(BOOTSTRAP_REPS, |i| {
        let mut rng = RngStreamSpec::new(seed, i).derive_in(Domain::Resample);
        let x = multinomial(a.len() as u64, &probs, &mut rng);
        let y = multinomial(b.len() as u64, &probs, &mut rng);
        tv_counts(&x, na, &y, nb)
    });
    null.sort_by(f64::total_cmp);
    let k = ((NULL_QUANTILE * BOOTSTRAP_REPS as f64).ceil() as usize).min(BOOTSTRAP_REPS) - 1;
    let threshold = null[k];
    let exceed = null.iter().filter(|&&v| v >= tv).count();
    VerificationReport::at_most(name, tv, threshold)
        .with_p_value((exceed + 1) as f64 / (BOOTSTRAP_REPS + 1) as f64)
        .with_note(format!(
            "{}x{} cells on [{}, {}) plus overflow; bootstrap reps {BOOTSTRAP_REPS}",
            cells.cells, cells.cells, cells.lo, cells.hi
        ))
}

/// Result of [`duality_two_point_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityOutcome {
    /// `(X̃_0, X̃_t)` against transposed `(X⁺_0, X⁺_t)`; should pass.
    pub duality: VerificationReport,
    /// `(X⁺_0, X⁺_t)` against an independent transposed copy; should fail,
    /// since `X⁺` is not reversible.
    pub control: VerificationReport,
}

impl DualityOutcome {
    /// Duality accepted and reversibility rejected.
    pub fn passed(&self) -> bool {
        self.duality.passed && !self.control.passed
    }
}

/// Runs the duality test and its negative control with `n` paths per sample.
pub fn duality_two_point_test(
    p: &ModelParams,
    seed: u64,
    t: f64,
    cells: Cellization,
    n: usize,
) -> Result<DualityOutcome> {
    if !(t >= 0.0 && t < p.horizon) {
        return Err(domain("t must lie in [0, T)", t));
    }
    if cells.cells < 2 || !(cells.hi > cells.lo) {
        return Err(domain(
            "need at least 2 cells on a non-empty box",
            cells.cells as f64,
        ));
    }
    let tilde = x_tilde_pairs(p, sub_seed(seed, 0), t, Start::Stationary, n)?;
    let plus = stationary_pairs(p, sub_seed(seed, 1), t, n)?.transposed();
    let other = stationary_pairs(p, sub_seed(seed, 2), t, n)?;
    let boot = sub_seed(seed, 3);
    let tag = format!("r={} t={t}", p.r);
    let duality = tv_against_null(&format!("duality {tag}"), &tilde, &plus, cells, boot)
        .with_provenance(n, seed, Some(p.dt));
    let control = tv_against_null(
        &format!("reversibility control {tag}"),
        &other,
        &plus,
        cells,
        boot,
    )
    .with_provenance(n, seed, Some(p.dt));
    Ok(DualityOutcome { duality, control })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_and_overflow() {
        let c = Cellization::default();
        assert_eq!(c.index(0.0), 0);
        assert_eq!(c.index(0.19), 0);
        assert_eq!(c.index(0.2), 1);
        assert_eq!(c.index(3.99), 19);
        assert_eq!(c.index(4.0), 20);
        assert_eq!(c.index(100.0), 20);
    }

    #[test]
    fn tv_of_identical_and_disjoint() {
        let c = Cellization::default();
        let a = PairSample {
            start: vec![0.1, 1.1],
            end: vec![0.5, 2.5],
        };
        assert_eq!(tv_distance(&a, &a, &c), 0.0);
        let b = PairSample {
            start: vec![3.0, 3.0],
            end: vec![3.0, 3.0],
        };
        assert_eq!(tv_distance(&a, &b, &c), 1.0);
    }

    #[test]
    fn multinomial_preserves_total() {
        let mut rng = RngStreamSpec::new(1, 0).derive();
        let k = multinomial(1000, &[0.2, 0.3, 0.5], &mut rng);
        assert_eq!(k.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn sparse_grids_are_coarsened() {
        let s = PairSample {
            start: (0..200).map(|i| (i % 40) as f64 * 0.1).collect(),
            end: (0..200).map(|i| (i % 37) as f64 * 0.1).collect(),
        };
        let c = settle_cells(&[&s], 200, Cellization::default());
        assert!(c.cells < 20);
    }

    #[test]
    fn time_zero_is_diagonal_and_passes() {
        let p = ModelParams::new(1.0, 0.0, 1.0).with_dt(1e-3);
        let out = duality_two_point_test(&p, 3, 0.0, Cellization::default(), 20_000).unwrap();
        assert!(out.duality.passed);
        // At t = 0 the control compares two diagonal samples as well.
        assert!(out.control.passed);
    }

    #[test]
    fn bad_time_rejected() {
        let p = ModelParams::new(1.0, 0.0, 1.0).with_dt(1e-3);
        assert!(duality_two_point_test(&p, 3, 2.0, Cellization::default(), 10).is_err());
    }
}
