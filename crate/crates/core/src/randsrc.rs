//! Reproducible random streams and the entry distributions of the tridiagonal model.
//!
//! Every stream is keyed by `(seed, stream_id)`. The generator is ChaCha8 with the
//! seed expanded into the key and the stream id placed in the nonce, so replicate `k`
//! can be generated on any worker without sequential hand-off.
//!
//! The gamma sampler is Marsaglia–Tsang squeeze/rejection for shape >= 1, with the
//! boosting identity `Gamma(a) = Gamma(a + 1) * U^(1/a)` for shape < 1. Boosting is
//! carried out in log space so that very small shapes (the `n beta -> 2 alpha` regime
//! produces shapes of order `1/n`) underflow gracefully instead of producing NaN.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A deterministic random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform variate on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            // 53 random mantissa bits, offset by half an ulp so 0 is never returned.
            let bits = self.rng.next_u64() >> 11;
            let u = (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
            if u > 0.0 && u < 1.0 {
                return u;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Shape parameter of a Gamma(shape, 1) law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaParams {
    shape: f64,
}

impl GammaParams {
    pub fn new(shape: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma shape must be positive and finite, got {shape}"
            )));
        }
        Ok(Self { shape })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }
}

/// Standard normal variate.
pub fn sample_gaussian(stream: &mut RngStream) -> f64 {
    stream.sample(StandardNormal)
}

/// Gamma(shape, 1) variate.
pub fn sample_gamma(p: GammaParams, stream: &mut RngStream) -> f64 {
    sample_log_gamma(p, stream).exp()
}

/// Natural logarithm of a Gamma(shape, 1) variate.
///
/// For shape < 1 the boosted draw is `ln G(a + 1) + ln(U) / a`, which stays finite
/// even when the variate itself underflows.
pub fn sample_log_gamma(p: GammaParams, stream: &mut RngStream) -> f64 {
    let a = p.shape;
    if a < 1.0 {
        let boosted = marsaglia_tsang(a + 1.0, stream);
        let u = stream.uniform_open();
        boosted.ln() + u.ln() / a
    } else {
        marsaglia_tsang(a, stream).ln()
    }
}

fn marsaglia_tsang(shape: f64, stream: &mut RngStream) -> f64 {
    debug_assert!(shape >= 1.0);
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = sample_gaussian(stream);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = stream.uniform_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Square root of a Gamma(k/2, 1) variate.
pub fn sample_chi_tilde(k: f64, stream: &mut RngStream) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "chi-tilde degree must be positive, got {k}"
        )));
    }
    let p = GammaParams::new(k / 2.0)?;
    Ok((0.5 * sample_log_gamma(p, stream)).exp())
}

/// Dirichlet(conc, ..., conc) weights of length `n`, built from normalized gamma draws.
pub fn sample_dirichlet(n: usize, conc: f64, stream: &mut RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("dirichlet dimension must be >= 1".into()));
    }
    let p = GammaParams::new(conc)?;
    let logs: Vec<f64> = (0..n).map(|_| sample_log_gamma(p, stream)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|&l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    Ok(w)
}

/// `E[X^k]` for `X ~ Gamma(shape, 1)`: the rising factorial `shape (shape+1) ... (shape+k-1)`.
pub fn gamma_moment_exact(shape: &BigRational, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, t| {
        acc * (shape + BigRational::from_integer(BigInt::from(t)))
    })
}

/// `E[Z^r]` for a standard normal `Z`: zero for odd `r`, `(r-1)!!` for even `r`.
pub fn gaussian_moment_exact(r: u32) -> BigRational {
    if r % 2 == 1 {
        return BigRational::zero();
    }
    let mut acc = BigInt::one();
    let mut k = r as i64 - 1;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    BigRational::from_integer(acc)
}

/// Same as [`gaussian_moment_exact`] in floating point.
pub(crate) fn gaussian_moment_f64(r: u32) -> f64 {
    if r % 2 == 1 {
        return 0.0;
    }
    let mut acc = 1.0;
    let mut k = r as i64 - 1;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}
