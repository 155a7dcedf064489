use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{EmpiricalDistribution, VerificationReport};
use crate::error::{Error, Result};

/// Smallest sample accepted by the asymptotic KS tests.
pub const KS_MIN_N: usize = 100;

/// `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`, the Kolmogorov survival function.
pub fn kolmogorov_pvalue(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn stephens(n_eff: f64, d: f64) -> f64 {
    let s = n_eff.sqrt();
    (s + 0.12 + 0.11 / s) * d
}

/// `sup |F_n − F|` over a sorted sample.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// One-sample two-sided Kolmogorov–Smirnov test at level `alpha`.
pub fn ks_test<F: Fn(f64) -> f64>(
    name: &str,
    emp: &EmpiricalDistribution,
    cdf: F,
    alpha: f64,
) -> Result<VerificationReport> {
    let n = emp.n();
    if n < KS_MIN_N {
        return Err(Error::InsufficientSamples {
            needed: KS_MIN_N,
            got: n,
        });
    }
    let d = ks_statistic(&emp.sorted(), cdf);
    let p = kolmogorov_pvalue(stephens(n as f64, d));
    Ok(pvalue_report(name, d, p, alpha, n))
}

fn pvalue_report(name: &str, d: f64, p: f64, alpha: f64, n: usize) -> VerificationReport {
    let mut r = VerificationReport::within(name, d, 0.0, f64::NAN);
    r.tolerance = alpha;
    r.passed = p > alpha;
    r.n = n;
    r.p_value = Some(p);
    r.note = Some(format!("pass iff p-value > {alpha}"));
    r
}

/// Two-sample Kolmogorov–Smirnov test at level `alpha`.
pub fn ks_two_sample(
    name: &str,
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    alpha: f64,
) -> Result<VerificationReport> {
    let (n, m) = (a.n(), b.n());
    if n.min(m) < KS_MIN_N {
        return Err(Error::InsufficientSamples {
            needed: KS_MIN_N,
            got: n.min(m),
        });
    }
    let (xa, xb) = (a.sorted(), b.sorted());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < m {
        let v = xa[i].min(xb[j]);
        while i < n && xa[i] <= v {
            i += 1;
        }
        while j < m && xb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n * m) as f64 / (n + m) as f64;
    let p = kolmogorov_pvalue(stephens(n_eff, d));
    Ok(pvalue_report(name, d, p, alpha, n + m))
}

/// Pearson χ² goodness of fit. Adjacent bins are merged until every expected
/// count is at least 5.
pub fn chi_square_gof(
    name: &str,
    observed: &[u64],
    probabilities: &[f64],
    alpha: f64,
) -> Result<VerificationReport> {
    if observed.len() != probabilities.len() {
        return Err(Error::OutOfRange(
            "observed and expected differ in length".into(),
        ));
    }
    let total: u64 = observed.iter().sum();
    let n = total as f64;
    let mass: f64 = probabilities.iter().sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &p) in observed.iter().zip(probabilities) {
        o += ob as f64;
        e += n * p / mass;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    if bins.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 10,
            got: total as usize,
        });
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = (bins.len() - 1) as f64;
    let dist = ChiSquared::new(df).map_err(|e| Error::OutOfRange(e.to_string()))?;
    let p = 1.0 - dist.cdf(stat);
    let mut r = pvalue_report(name, stat, p, alpha, total as usize);
    r.target = df;
    Ok(r)
}

/// χ² test of samples against bin probabilities on the edges `edges`, with
/// one extra overflow bin above the last edge.
pub fn histogram_chi_square(
    name: &str,
    samples: &[f64],
    edges: &[f64],
    probabilities: &[f64],
    alpha: f64,
) -> Result<VerificationReport> {
    if probabilities.len() != edges.len() {
        return Err(Error::OutOfRange(
            "need one probability per bin incl. overflow".into(),
        ));
    }
    let mut counts = vec![0u64; edges.len()];
    for &x in samples {
        let k = edges.partition_point(|&e| e <= x);
        if k == 0 {
            return Err(Error::OutOfRange(format!(
                "sample {x} below the first edge"
            )));
        }
        counts[k - 1] += 1;
    }
    chi_square_gof(name, &counts, probabilities, alpha)
}
