//! Limit densities and the limit-variance functional.
//!
//! `sc` is the semicircle law on `[-2, 2]`. `nu_alpha` is the limit of the empirical
//! distribution when `n beta -> 2 alpha`, built from
//! `f_hat_alpha(x) = sqrt(alpha / Gamma(alpha)) * int_0^inf t^(alpha-1) exp(-t^2/2 + i x t) dt`.

pub mod quadrature;

use std::f64::consts::PI;
use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use libm::lgamma as ln_gamma;

use crate::error::{Error, Result};
use quadrature::integrate_panels;

/// Default number of grid points for density grids.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Relative (to the contour peak) tolerance for `f_hat_alpha`.
const FHAT_REL_TOL: f64 = 1e-13;
/// Integrand is dropped below `peak * exp(-FHAT_LOG_CUT)`, about `1e-16 * peak`.
const FHAT_LOG_CUT: f64 = 36.9;

/// Semicircle density `sqrt(4 - x^2) / (2 pi)` on `[-2, 2]`, zero outside.
pub fn semicircle_pdf(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

/// Semicircle distribution function.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// `r`-th semicircle moment: zero for odd `r`, the Catalan number `C_{r/2}` otherwise.
pub fn semicircle_moment(r: usize) -> BigRational {
    if r % 2 == 1 {
        return BigRational::zero();
    }
    let q = r / 2;
    let mut c = BigInt::from(1);
    for i in 0..q {
        c = c * BigInt::from(2 * (2 * i + 1)) / BigInt::from(i + 2);
    }
    BigRational::from_integer(c)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// `f_hat_alpha(x)`, computed on a contour through the saddle point.
///
/// For `x >= 0` the ray `[0, inf)` is deformed to the segment `0 -> i c` followed by
/// the line `i c + [0, inf)`, with `c = x / 2`. On that contour the integrand's size is
/// comparable to the result, so the value keeps relative accuracy even where it is
/// exponentially small. Negative `x` uses `f_hat(-x) = conj(f_hat(x))`.
pub fn f_hat_alpha(alpha: f64, x: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    if !x.is_finite() {
        return Err(Error::InvalidParameter("x must be finite".into()));
    }
    let v = f_hat_nonneg(alpha, x.abs())?;
    Ok(if x < 0.0 { v.conj() } else { v })
}

fn f_hat_nonneg(alpha: f64, y: f64) -> Result<Complex64> {
    let log_k = 0.5 * (alpha.ln() - ln_gamma(alpha));
    let am1 = alpha - 1.0;
    let c = 0.5 * y;

    // log-size of the vertical piece: (alpha-1) ln v + v^2/2 - y v on (0, c]
    let vert_log = |v: f64| {
        let lt = if am1 == 0.0 { 0.0 } else { am1 * v.ln() };
        lt + 0.5 * v * v - y * v
    };
    // log-size of the horizontal piece: (alpha-1) ln|t| - s^2/2 - 3 y^2/8
    let horiz_log = |s: f64| {
        let lt = if am1 == 0.0 { 0.0 } else { 0.5 * am1 * (s * s + c * c).ln() };
        lt - 0.5 * s * s - 0.375 * y * y
    };

    // log of the largest integrand size on the contour; after the substitution
    // used for alpha < 1 both pieces are bounded by 1/alpha
    let s_peak = if am1 > c * c { (am1 - c * c).sqrt() } else { 0.0 };
    let peak = if am1 < 0.0 {
        -alpha.ln()
    } else {
        let mut m = horiz_log(s_peak);
        if c > 0.0 {
            let probes = 256;
            for i in 1..=probes {
                m = m.max(vert_log(c * i as f64 / probes as f64));
            }
            if am1 == 0.0 {
                m = m.max(0.0);
            }
        }
        m
    };

    // horizontal piece, in the variable s (or w = s^alpha when alpha < 1)
    let s_max = {
        let mut s = s_peak.max(1.0);
        while horiz_log(s) > peak - FHAT_LOG_CUT {
            s += 0.5;
        }
        s
    };
    // phases reach (alpha-1) pi/2 + y s_max/2, and each integrand value carries a
    // rounding error of about eps times that
    let phase_scale = am1.abs() * 0.5 * PI + 0.5 * y * s_max;
    let tol = FHAT_REL_TOL.max(8.0 * f64::EPSILON * phase_scale * s_max);
    let width = if y > 0.0 { (2.0 * PI / y).min(1.0) } else { 1.0 };
    let n_panels = ((s_max / width).ceil() as usize).max(1);
    let horizontal = if alpha < 1.0 {
        let breaks: Vec<f64> = (0..=n_panels)
            .map(|i| (s_max * i as f64 / n_panels as f64).powf(alpha))
            .collect();
        integrate_panels(
            |w: f64| {
                if w <= 0.0 {
                    // |s + ic|^(alpha-1) s^(1-alpha) -> 0 when c > 0, 1 when c = 0
                    let lim = if c > 0.0 { 0.0 } else { 1.0 };
                    return Complex64::new(lim * (-0.375 * y * y - peak).exp() / alpha, 0.0);
                }
                let s = w.powf(1.0 / alpha);
                let mag = horiz_log(s) - am1 * s.ln() - peak;
                let phase = am1 * c.atan2(s) + 0.5 * s * y;
                Complex64::from_polar(mag.exp() / alpha, phase)
            },
            &breaks,
            tol,
        )?
    } else {
        let breaks: Vec<f64> = (0..=n_panels)
            .map(|i| s_max * i as f64 / n_panels as f64)
            .collect();
        integrate_panels(
            |s: f64| {
                let mag = horiz_log(s) - peak;
                let phase = am1 * c.atan2(s) + 0.5 * s * y;
                Complex64::from_polar(mag.exp(), phase)
            },
            &breaks,
            tol,
        )?
    };

    // vertical piece: i^alpha * int_0^c v^(alpha-1) exp(v^2/2 - y v) dv
    let vertical = if c > 0.0 {
        let panels = (c.ceil() as usize).max(1);
        let real: f64 = if alpha < 1.0 {
            let top = c.powf(alpha);
            let breaks: Vec<f64> = (0..=panels).map(|i| top * i as f64 / panels as f64).collect();
            integrate_panels(
                |w: f64| {
                    let v = w.powf(1.0 / alpha);
                    (0.5 * v * v - y * v - peak).exp() / alpha
                },
                &breaks,
                tol,
            )?
        } else {
            let breaks: Vec<f64> = (0..=panels).map(|i| c * i as f64 / panels as f64).collect();
            integrate_panels(
                |v: f64| {
                    if v <= 0.0 && am1 > 0.0 {
                        0.0
                    } else {
                        (vert_log(v) - peak).exp()
                    }
                },
                &breaks,
                tol,
            )?
        };
        Complex64::from_polar(real, 0.5 * PI * alpha)
    } else {
        Complex64::new(0.0, 0.0)
    };

    Ok((horizontal + vertical) * (peak + log_k).exp())
}

/// Density of `nu_alpha` at `x`:
/// `sqrt(alpha) * phi(y) / |f_hat_alpha(y)|^2` with `y = sqrt(alpha) x` and `phi` the
/// standard normal density.
pub fn nu_alpha_pdf(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let y = alpha.sqrt() * x;
    let fh = f_hat_alpha(alpha, y)?;
    // ratio taken in log space: both factors can be tiny in the tails
    let log = 0.5 * alpha.ln() - 0.5 * y * y - 0.5 * (2.0 * PI).ln() - 2.0 * fh.norm().ln();
    Ok(log.exp())
}

/// A density tabulated on an ascending uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    /// Trapezoid integral of `values`.
    pub total_mass: f64,
}

impl DensityGrid {
    /// Tabulate `pdf` at `points` uniformly spaced on `[-half_width, half_width]`.
    pub fn tabulate<F>(half_width: f64, points: usize, pdf: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        if points < 2 || !(half_width > 0.0) {
            return Err(Error::InvalidParameter(
                "density grid needs >= 2 points and positive width".into(),
            ));
        }
        let h = 2.0 * half_width / (points - 1) as f64;
        let xs: Vec<f64> = (0..points).map(|i| -half_width + h * i as f64).collect();
        let values = xs.par_iter().map(|&x| pdf(x)).collect::<Result<Vec<f64>>>()?;
        let mut grid = DensityGrid {
            points: xs,
            values,
            total_mass: 0.0,
        };
        grid.total_mass = grid.moment(0);
        Ok(grid)
    }

    /// Trapezoid approximation of `int x^r density(x) dx`.
    pub fn moment(&self, r: u32) -> f64 {
        let n = self.points.len();
        let mut acc = 0.0;
        for i in 0..n {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            acc += w * self.points[i].powi(r as i32) * self.values[i];
        }
        let h = self.points[1] - self.points[0];
        acc * h
    }

    /// Two-column CSV `x,density` with header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,density")?;
        for (x, v) in self.points.iter().zip(&self.values) {
            writeln!(out, "{x:.10e},{v:.10e}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Default half-width of the `nu_alpha` grid.
pub fn nu_alpha_half_width(alpha: f64) -> f64 {
    (6.0 / alpha.sqrt() + 1.0).max(2.5)
}

/// `nu_alpha` on the default grid.
pub fn nu_alpha_grid(alpha: f64) -> Result<DensityGrid> {
    nu_alpha_grid_with(alpha, nu_alpha_half_width(alpha), DEFAULT_GRID_POINTS)
}

pub fn nu_alpha_grid_with(alpha: f64, half_width: f64, points: usize) -> Result<DensityGrid> {
    check_alpha(alpha)?;
    DensityGrid::tabulate(half_width, points, |x| nu_alpha_pdf(alpha, x))
}

/// Semicircle on a grid over `[-2, 2]`.
pub fn semicircle_grid(points: usize) -> Result<DensityGrid> {
    DensityGrid::tabulate(2.0, points, |x| Ok(semicircle_pdf(x)))
}

/// Smallest and largest Chebyshev grid sizes tried by [`sigma_f_sq_quadrature`].
pub const SIGMA_MIN_NODES: usize = 32;
pub const SIGMA_MAX_NODES: usize = 8192;
/// Convergence target between successive grid doublings.
pub const SIGMA_TOL: f64 = 1e-9;

/// Limit variance
/// `(1 / 2 pi^2) int int ((f(x)-f(y))/(x-y))^2 (4 - xy) / (sqrt(4-x^2) sqrt(4-y^2)) dx dy`
/// over `[-2, 2]^2`.
///
/// With `x = 2 cos theta`, `y = 2 cos phi` the weight disappears and a midpoint rule in
/// both angles is used; the node count doubles until successive values agree.
/// `f_prime` supplies the difference quotient on and near the diagonal.
pub fn sigma_f_sq_quadrature<F, G>(f: F, f_prime: G) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    let mut prev = sigma_on_grid(&f, &f_prime, SIGMA_MIN_NODES);
    let mut nodes = SIGMA_MIN_NODES;
    while nodes < SIGMA_MAX_NODES {
        nodes *= 2;
        let cur = sigma_on_grid(&f, &f_prime, nodes);
        if !cur.is_finite() {
            return Err(Error::Accuracy("non-finite sigma_f^2 estimate".into()));
        }
        if (cur - prev).abs() <= SIGMA_TOL * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Accuracy(format!(
        "sigma_f^2 quadrature not converged at {SIGMA_MAX_NODES} nodes"
    )))
}

fn sigma_on_grid<F, G>(f: &F, f_prime: &G, nodes: usize) -> f64
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    let xs: Vec<f64> = (0..nodes)
        .map(|i| 2.0 * ((i as f64 + 0.5) * PI / nodes as f64).cos())
        .collect();
    let fx: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let fpx: Vec<f64> = xs.iter().map(|&x| f_prime(x)).collect();
    // symmetric integrand: strict upper triangle twice plus the diagonal
    let rows: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|i| {
            let x = xs[i];
            let mut acc = fpx[i] * fpx[i] * (4.0 - x * x);
            for j in (i + 1)..nodes {
                let y = xs[j];
                let d = if (x - y).abs() < 1e-8 * 2.0 {
                    f_prime(0.5 * (x + y))
                } else {
                    (fx[i] - fx[j]) / (x - y)
                };
                acc += 2.0 * d * d * (4.0 - x * y);
            }
            acc
        })
        .collect();
    rows.iter().sum::<f64>() / (2.0 * (nodes * nodes) as f64)
}
