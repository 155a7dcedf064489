//! Adaptive Gauss–Kronrod quadrature (7-point Gauss, 15-point Kronrod).
//!
//! Intervals are bisected globally in order of decreasing error estimate
//! until the total estimate meets the tolerance or the interval cap is hit.
//! Semi-infinite ranges are mapped to `[0, 1)` by `z = a + u/(1-u)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Default absolute tolerance.
pub const ABS_TOL: f64 = 1e-10;
/// Default cap on the number of subintervals.
pub const MAX_INTERVALS: usize = 4000;

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: ABS_TOL,
            rel_tol: 1e-13,
            max_intervals: MAX_INTERVALS,
        }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).abs();
    (value, error)
}

impl Quadrature {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Integral over the finite interval `[a, b]`.
    pub fn estimate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Estimate {
        if a == b {
            return Estimate {
                value: 0.0,
                error: 0.0,
                intervals: 0,
            };
        }
        let (value, error) = gk15(&mut f, a, b);
        let mut heap = BinaryHeap::new();
        heap.push(Piece { a, b, value, error });
        let mut total = value;
        let mut total_err = error;
        while heap.len() < self.max_intervals {
            if total_err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                break;
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                heap.push(worst);
                break;
            }
            let (v1, e1) = gk15(&mut f, worst.a, mid);
            let (v2, e2) = gk15(&mut f, mid, worst.b);
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
            heap.push(Piece {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Piece {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
        }
        // Re-sum to shed the drift of the running totals.
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        Estimate {
            value,
            error,
            intervals: heap.len(),
        }
    }

    /// Integral over `[a, ∞)`.
    pub fn estimate_to_infinity<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64) -> Estimate {
        self.estimate(
            |u| {
                let w = 1.0 - u;
                if w <= 0.0 {
                    return 0.0;
                }
                let v = f(a + u / w) / (w * w);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
        )
    }

    fn accept(&self, e: Estimate) -> Result<f64> {
        if e.value.is_finite() && e.error <= self.abs_tol.max(self.rel_tol * e.value.abs()) {
            Ok(e.value)
        } else {
            Err(Error::Quadrature {
                estimate: e.value,
                error: e.error,
                tolerance: self.abs_tol,
            })
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.accept(self.estimate(f, a, b))
    }

    pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(&self, f: F, a: f64) -> Result<f64> {
        self.accept(self.estimate_to_infinity(f, a))
    }

    /// Integral over the real line, split at `centre`.
    pub fn integrate_real_line<F: FnMut(f64) -> f64>(&self, mut f: F, centre: f64) -> Result<f64> {
        let right = self.integrate_to_infinity(&mut f, centre)?;
        let left = self.integrate_to_infinity(|z| f(2.0 * centre - z), centre)?;
        Ok(left + right)
    }
}

/// `∫_a^b f` at the default tolerance.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    Quadrature::default().integrate(f, a, b)
}

/// `∫_a^∞ f` at the default tolerance.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(f: F, a: f64) -> Result<f64> {
    Quadrature::default().integrate_to_infinity(f, a)
}

/// `∫_ℝ f` at the default tolerance.
pub fn integrate_real_line<F: FnMut(f64) -> f64>(f: F) -> Result<f64> {
    Quadrature::default().integrate_real_line(f, 0.0)
}
