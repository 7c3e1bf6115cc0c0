//! The tridiagonal matrix model and its spectral samples.
//!
//! `T_{n,beta}` has diagonal `a_i = sqrt(2/(n beta)) N(0,1)` and off-diagonal
//! `b_i = sqrt(2/(n beta)) chi~_{(n-i) beta}` for `i = 1..n-1`, all independent.
//! Indices in this module are 1-based in documentation and 0-based in storage.

use std::fmt::Write as _;

use crate::eig;
use crate::error::{Error, Result};
use crate::randsrc::{sample_chi_tilde, sample_dirichlet, sample_gaussian, RngStream};

/// A real symmetric tridiagonal matrix with `(n, beta)` metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalMatrix {
    beta: f64,
    deterministic: bool,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalMatrix {
    /// Builds a matrix from its diagonals. `beta = None` marks a deterministic matrix.
    pub fn from_parts(diag: Vec<f64>, offdiag: Vec<f64>, beta: Option<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "off-diagonal length {} does not match dimension {}",
                offdiag.len(),
                diag.len()
            )));
        }
        if let Some(b) = offdiag.iter().find(|b| !(**b >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "off-diagonal entries must be nonnegative, got {b}"
            )));
        }
        let (beta, deterministic) = match beta {
            Some(b) if b > 0.0 => (b, false),
            Some(b) => {
                return Err(Error::InvalidParameter(format!("beta must be positive, got {b}")))
            }
            None => (0.0, true),
        };
        Ok(Self {
            beta,
            deterministic,
            diag,
            offdiag,
        })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Beta of the ensemble; `0.0` for deterministic reference matrices.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// `a_i`, 1-based.
    pub fn a(&self, i: usize) -> f64 {
        self.diag[i - 1]
    }

    /// `b_i`, 1-based, `1 <= i <= n - 1`.
    pub fn b(&self, i: usize) -> f64 {
        self.offdiag[i - 1]
    }

    pub fn diag_mut(&mut self) -> &mut [f64] {
        &mut self.diag
    }

    pub fn offdiag_mut(&mut self) -> &mut [f64] {
        &mut self.offdiag
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiag[i - 1] } else { 0.0 };
                let right = if i + 1 < n { self.offdiag[i] } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Plain-text dump: `n beta`, then the diagonal, then the off-diagonal,
    /// each with 17 significant digits.
    pub fn to_dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {}", self.n(), fmt17(self.beta)).unwrap();
        writeln!(s, "{}", join17(&self.diag)).unwrap();
        writeln!(s, "{}", join17(&self.offdiag)).unwrap();
        s
    }

    /// Parses [`to_dump`](Self::to_dump) output. A beta of zero reads back as deterministic.
    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix dump".into()))?;
        let mut head = header.split_whitespace();
        let n: usize = parse_field(head.next(), "n")?;
        let beta: f64 = parse_field(head.next(), "beta")?;
        let diag = parse_row(lines.next().unwrap_or(""))?;
        let offdiag = parse_row(lines.next().unwrap_or(""))?;
        if diag.len() != n {
            return Err(Error::Parse(format!(
                "header says n = {n} but diagonal has {} entries",
                diag.len()
            )));
        }
        let beta = if beta == 0.0 { None } else { Some(beta) };
        Self::from_parts(diag, offdiag, beta)
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn join17(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt17(x)).collect::<Vec<_>>().join(" ")
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, name: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Parse(format!("missing {name}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad {name}")))
}

fn parse_row(line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad number {t:?}"))))
        .collect()
}

/// Samples `T_{n,beta}`: Gaussian diagonal, scaled chi-tilde off-diagonal.
///
/// The diagonal is drawn first, then `b_1, ..., b_{n-1}`.
pub fn build_gbe(n: usize, beta: f64, stream: &mut RngStream) -> Result<TridiagonalMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let scale = (2.0 / (n as f64 * beta)).sqrt();
    let diag: Vec<f64> = (0..n).map(|_| scale * sample_gaussian(stream)).collect();
    let offdiag = (1..n)
        .map(|i| Ok(scale * sample_chi_tilde((n - i) as f64 * beta, stream)?))
        .collect::<Result<Vec<f64>>>()?;
    TridiagonalMatrix::from_parts(diag, offdiag, Some(beta))
}

/// The free Jacobi matrix: zero diagonal, unit off-diagonal.
pub fn free_jacobi(n: usize) -> Result<TridiagonalMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    TridiagonalMatrix::from_parts(vec![0.0; n], vec![1.0; n - 1], None)
}

/// Top-left `n x n` block of the infinite matrix `J_alpha` with i.i.d. entries
/// `N(0,1)/sqrt(alpha)` on the diagonal and `chi~_{2 alpha}/sqrt(alpha)` off it.
///
/// The stored beta is `2 alpha / n`, the value for which `n beta = 2 alpha`.
pub fn build_j_alpha_truncation(
    n: usize,
    alpha: f64,
    stream: &mut RngStream,
) -> Result<TridiagonalMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let scale = 1.0 / alpha.sqrt();
    let diag: Vec<f64> = (0..n).map(|_| scale * sample_gaussian(stream)).collect();
    let offdiag = (1..n)
        .map(|_| Ok(scale * sample_chi_tilde(2.0 * alpha, stream)?))
        .collect::<Result<Vec<f64>>>()?;
    TridiagonalMatrix::from_parts(diag, offdiag, Some(2.0 * alpha / n as f64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleMeta {
    pub n: usize,
    pub beta: f64,
    pub seed: u64,
    pub stream: u64,
}

/// Eigenvalues with optional spectral-measure weights `q_j^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSample {
    pub eigenvalues: Vec<f64>,
    pub weights: Option<Vec<f64>>,
    pub meta: SampleMeta,
}

impl SpectralSample {
    /// `<L_n, x^r>`: uniform weights.
    pub fn empirical_moment(&self, r: u32) -> f64 {
        let n = self.eigenvalues.len() as f64;
        self.eigenvalues.iter().map(|x| x.powi(r as i32)).sum::<f64>() / n
    }

    /// `<mu_n, x^r>`, or `None` when weights were not drawn.
    pub fn spectral_moment(&self, r: u32) -> Option<f64> {
        self.weights.as_ref().map(|w| {
            w.iter()
                .zip(&self.eigenvalues)
                .map(|(q, x)| q * x.powi(r as i32))
                .sum()
        })
    }
}

/// Eigenvalues of `t`, plus Dirichlet(beta/2) weights drawn from `stream` when
/// `with_weights` is set.
///
/// The weights are independent of the eigenvalues for this ensemble, so they are
/// sampled directly and eigenvectors are never computed.
pub fn spectral_sample(
    t: &TridiagonalMatrix,
    with_weights: bool,
    stream: &mut RngStream,
) -> Result<SpectralSample> {
    let eig = eig::eigenvalues(t)?;
    let weights = if with_weights {
        if t.is_deterministic() {
            return Err(Error::InvalidParameter(
                "spectral weights need a sampled matrix with beta > 0".into(),
            ));
        }
        Some(sample_dirichlet(t.n(), t.beta() / 2.0, stream)?)
    } else {
        None
    };
    Ok(SpectralSample {
        eigenvalues: eig.values,
        weights,
        meta: SampleMeta {
            n: t.n(),
            beta: t.beta(),
            seed: stream.seed(),
            stream: stream.stream_id(),
        },
    })
}
