//! Sample summaries and Kolmogorov–Smirnov distances.

use serde::{Deserialize, Serialize};

use crate::densities::semicircle_cdf;
use crate::error::{Error, Result};

/// Minimum sample size for [`ks_distance_to_normal`].
pub const KS_MIN_SAMPLES: usize = 100;
/// Minimum number of eigenvalues for [`semicircle_ks`].
pub const SEMICIRCLE_KS_MIN: usize = 10;

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Sup-distance between the empirical distribution of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// KS distance between already standardized `samples` and the standard normal.
pub fn ks_distance_to_normal(samples: &[f64]) -> Result<f64> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: KS_MIN_SAMPLES,
            got: samples.len(),
        });
    }
    Ok(ks_distance(samples, normal_cdf))
}

/// KS distance between the empirical eigenvalue distribution and the semicircle law.
pub fn semicircle_ks(eigenvalues: &[f64]) -> Result<f64> {
    if eigenvalues.len() < SEMICIRCLE_KS_MIN {
        return Err(Error::TooFewSamples {
            needed: SEMICIRCLE_KS_MIN,
            got: eigenvalues.len(),
        });
    }
    Ok(ks_distance(eigenvalues, semicircle_cdf))
}

/// Moments of a sample: unbiased variance, skewness and excess kurtosis from central
/// moments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub var: f64,
    pub skew: f64,
    pub ex_kurt: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Summary {
                count: 0,
                mean: f64::NAN,
                var: f64::NAN,
                skew: f64::NAN,
                ex_kurt: f64::NAN,
            };
        }
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= nf;
        m3 /= nf;
        m4 /= nf;
        let var = if n > 1 { m2 * nf / (nf - 1.0) } else { f64::NAN };
        Summary {
            count: n,
            mean,
            var,
            skew: m3 / m2.powf(1.5),
            ex_kurt: m4 / (m2 * m2) - 3.0,
        }
    }

    /// Standard error of the mean.
    pub fn mean_se(&self) -> f64 {
        (self.var / self.count as f64).sqrt()
    }

    /// Approximate standard error of the sample variance.
    pub fn var_se(&self) -> f64 {
        variance_standard_error(self.var, self.ex_kurt, self.count)
    }
}

/// `sd(s^2) ~ var * sqrt(2/(n-1) + kappa/n)` with `kappa` the excess kurtosis.
pub fn variance_standard_error(var: f64, ex_kurt: f64, n: usize) -> f64 {
    let nf = n as f64;
    var * (2.0 / (nf - 1.0) + ex_kurt / nf).max(0.0).sqrt()
}
