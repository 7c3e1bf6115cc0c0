//! Eigenvalues of real symmetric tridiagonal matrices.
//!
//! Values-only implicit QL with Wilkinson shift and deflation, in the tradition of
//! EISPACK `tql1`. A Sturm-sequence count is provided as an independent validator.

use crate::error::{Error, Result};
use crate::model::TridiagonalMatrix;

/// Maximum QL sweeps spent on a single eigenvalue.
pub const MAX_SWEEPS: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Total QL sweeps performed.
    pub iterations: usize,
    pub converged: bool,
}

/// All eigenvalues of `t`, ascending.
pub fn eigenvalues(t: &TridiagonalMatrix) -> Result<EigenResult> {
    tridiagonal_eigenvalues(t.diag(), t.offdiag())
}

/// Slice form of [`eigenvalues`]: `offdiag.len() == diag.len() - 1`.
pub fn tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<EigenResult> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::InvalidParameter("off-diagonal length must be n - 1".into()));
    }
    let mut d = diag.to_vec();
    let mut e = Vec::with_capacity(n);
    e.extend_from_slice(offdiag);
    e.push(0.0);
    let iterations = ql_implicit(&mut d, &mut e)?;
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(EigenResult {
        values: d,
        iterations,
        converged: true,
    })
}

/// Implicit QL on `d` (diagonal) and `e` (sub-diagonal, `e[n-1]` unused).
/// On return `d` holds the eigenvalues in no particular order.
fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<usize> {
    let n = d.len();
    let mut total = 0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            // first negligible off-diagonal at or after l
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::NoConvergence { block: l });
            }
            sweeps += 1;
            total += 1;

            // Wilkinson shift from the leading 2x2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = pythag(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = pythag(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(total)
}

/// `sqrt(f^2 + g^2)`, rescaled only when the squares would overflow or underflow.
#[inline]
fn pythag(f: f64, g: f64) -> f64 {
    let s = f * f + g * g;
    if s.is_finite() && s > 1e-290 {
        s.sqrt()
    } else {
        f.hypot(g)
    }
}

/// Number of eigenvalues strictly below `t`, by counting negative pivots of the
/// LDL^T factorization of `T - t I`.
///
/// A pivot that is exactly zero means `t` hit an eigenvalue of a leading block; it is
/// replaced by a tiny positive value, which is the same as nudging `t` down by about
/// `1e-14` times the matrix scale.
pub fn eigen_count_below(t: &TridiagonalMatrix, x: f64) -> usize {
    sturm_count(t.diag(), t.offdiag(), x)
}

pub(crate) fn sturm_count(diag: &[f64], offdiag: &[f64], x: f64) -> usize {
    let scale = diag
        .iter()
        .chain(offdiag)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let tiny = 1e-14 * scale;
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            q = diag[i] - x - offdiag[i - 1] * offdiag[i - 1] / q;
        }
        if q == 0.0 {
            q = tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin_bounds(t: &TridiagonalMatrix) -> (f64, f64) {
    let n = t.n();
    let (d, e) = (t.diag(), t.offdiag());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let rad = if i > 0 { e[i - 1] } else { 0.0 } + if i + 1 < n { e[i] } else { 0.0 };
        lo = lo.min(d[i] - rad);
        hi = hi.max(d[i] + rad);
    }
    (lo, hi)
}

/// `S_n = sum_j f(lambda_j)`, summed in ascending order of magnitude.
pub fn linear_statistic<F: Fn(f64) -> f64>(e: &EigenResult, f: F) -> f64 {
    let mut terms: Vec<f64> = e.values.iter().map(|&x| f(x)).collect();
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    terms.iter().sum()
}
