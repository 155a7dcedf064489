//! The subordinator `H^Ψ` (unit drift plus compound Poisson jumps), its
//! right-continuous inverse `L^Ψ` and remaining lifetime `R^Ψ`.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::StreamRng;

/// A finite stretch `[0, horizon]` of a subordinator `d·u + Σ_{u_i ≤ u} l_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPath")]
pub struct SubordinatorPath {
    drift: f64,
    jump_times: Vec<f64>,
    jump_sizes: Vec<f64>,
    horizon: f64,
    /// `cum[i] = Σ_{j<i} l_j`.
    #[serde(skip)]
    cum: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPath {
    drift: f64,
    jump_times: Vec<f64>,
    jump_sizes: Vec<f64>,
    horizon: f64,
}

impl TryFrom<RawPath> for SubordinatorPath {
    type Error = Error;

    fn try_from(r: RawPath) -> Result<Self> {
        Self::new(r.drift, r.jump_times, r.jump_sizes, r.horizon)
    }
}

impl SubordinatorPath {
    pub fn new(
        drift: f64,
        jump_times: Vec<f64>,
        jump_sizes: Vec<f64>,
        horizon: f64,
    ) -> Result<Self> {
        if !(drift > 0.0) {
            return Err(domain("drift must be > 0", drift));
        }
        if jump_times.len() != jump_sizes.len() {
            return Err(Error::OutOfRange(
                "jump times and sizes differ in length".into(),
            ));
        }
        if jump_times.windows(2).any(|w| !(w[0] < w[1]))
            || jump_times.iter().any(|&u| !(u > 0.0 && u <= horizon))
        {
            return Err(Error::OutOfRange(
                "jump times must increase within (0, horizon]".into(),
            ));
        }
        if jump_sizes.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::OutOfRange("jump sizes must be > 0".into()));
        }
        let mut cum = Vec::with_capacity(jump_sizes.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for &l in &jump_sizes {
            acc += l;
            cum.push(acc);
        }
        Ok(Self {
            drift,
            jump_times,
            jump_sizes,
            horizon,
            cum,
        })
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn jump_sizes(&self) -> &[f64] {
        &self.jump_sizes
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `H(u)`, right-continuous.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&u) {
            return Err(Error::OutOfRange(format!(
                "u = {u} outside [0, {}]",
                self.horizon
            )));
        }
        let k = self.jump_times.partition_point(|&s| s <= u);
        Ok(self.drift * u + self.cum[k])
    }

    /// `H(horizon)`, the largest level that can be inverted.
    pub fn range_end(&self) -> f64 {
        self.drift * self.horizon + self.cum[self.jump_sizes.len()]
    }

    /// Jump `n` occupies `[a_n, b_n)` in the range.
    pub fn jump_interval(&self, n: usize) -> (f64, f64) {
        let a = self.drift * self.jump_times[n] + self.cum[n];
        (a, a + self.jump_sizes[n])
    }

    fn locate(&self, t: f64) -> Result<(usize, bool)> {
        // Levels reconstructed by summation may exceed the end by rounding.
        let end = self.range_end();
        if !(t >= 0.0) || t > end + 1e-12 * end.max(1.0) {
            return Err(Error::OutOfRange(format!(
                "level {t} outside [0, {}]",
                self.range_end()
            )));
        }
        // Number of jumps whose interval starts at or before t.
        let n = self.jump_times.len();
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.jump_interval(mid).0 <= t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let inside = lo > 0 && t < self.jump_interval(lo - 1).1;
        Ok((lo, inside))
    }

    /// `L(t) = inf{u > 0 : H(u) > t}`.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        let (k, inside) = self.locate(t)?;
        if inside {
            Ok(self.jump_times[k - 1])
        } else {
            Ok((t - self.cum[k]) / self.drift)
        }
    }

    /// `R(t) = H(L(t)) − t`.
    pub fn remaining_lifetime(&self, t: f64) -> Result<f64> {
        let (k, inside) = self.locate(t)?;
        Ok(if inside {
            self.jump_interval(k - 1).1 - t
        } else {
            0.0
        })
    }
}

/// Lazily samples jumps of `H^Ψ`: interarrivals and sizes both `Exp(√r)`.
pub struct PsiSampler {
    rate: f64,
    last_time: f64,
    rng: StreamRng,
}

impl PsiSampler {
    pub fn new(r: f64, rng: StreamRng) -> Self {
        Self {
            rate: r.sqrt(),
            last_time: 0.0,
            rng,
        }
    }

    /// Next `(operational time, size)`, or `None` when `r = 0`.
    pub fn next_jump(&mut self) -> Option<(f64, f64)> {
        if self.rate == 0.0 {
            return None;
        }
        let e: f64 = self.rng.sample(Exp1);
        let l: f64 = self.rng.sample(Exp1);
        self.last_time += e / self.rate;
        Some((self.last_time, l / self.rate))
    }
}

/// Samples `H^Ψ` on `[0, op_horizon]`.
pub fn sample_subordinator_psi(
    r: f64,
    op_horizon: f64,
    rng: StreamRng,
) -> Result<SubordinatorPath> {
    if !(r >= 0.0) {
        return Err(domain("r must be ≥ 0", r));
    }
    if !(op_horizon > 0.0) {
        return Err(domain("op_horizon must be > 0", op_horizon));
    }
    let mut s = PsiSampler::new(r, rng);
    let (mut times, mut sizes) = (Vec::new(), Vec::new());
    while let Some((u, l)) = s.next_jump() {
        if u > op_horizon {
            break;
        }
        times.push(u);
        sizes.push(l);
    }
    SubordinatorPath::new(1.0, times, sizes, op_horizon)
}

/// `inverse_subordinator` in free-function form.
pub fn inverse_subordinator(s: &SubordinatorPath, t: f64) -> Result<f64> {
    s.inverse(t)
}

/// `remaining_lifetime` in free-function form.
pub fn remaining_lifetime(s: &SubordinatorPath, t: f64) -> Result<f64> {
    s.remaining_lifetime(t)
}
