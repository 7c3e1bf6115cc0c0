//! Panel-wise Gauss–Legendre quadrature with adaptive bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::num::NonZeroUsize;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes per panel.
pub const PANEL_ORDER: usize = 16;
/// Bisections allowed per call before giving up.
pub const MAX_PANELS: usize = 2000;

/// Values the integrator can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Box<[(f64, f64)]>> = OnceLock::new();
    RULE.get_or_init(|| {
        let order = NonZeroUsize::new(PANEL_ORDER).expect("nonzero order");
        GaussLegendre::new(order).into_node_weight_pairs()
    })
}

/// Fixed-order Gauss–Legendre estimate on `[a, b]`.
pub fn gauss_panel<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> V {
    panel_with_mass(f, a, b).0
}

/// The panel estimate together with the same rule applied to `|f|`.
fn panel_with_mass<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> (V, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = V::zero();
    let mut mass = 0.0;
    for &(x, w) in rule() {
        let v = f(mid + half * x);
        mass += v.magnitude() * w;
        acc = acc + v * w;
    }
    (acc * half, mass * half.abs())
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
    mass: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn estimate<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64, whole: V) -> (Panel<V>, V, V) {
    let m = 0.5 * (a + b);
    let (left, ml) = panel_with_mass(f, a, m);
    let (right, mr) = panel_with_mass(f, m, b);
    let value = left + right;
    let err = (value - whole).magnitude();
    let mass = ml + mr;
    (Panel { a, b, value, err, mass }, left, right)
}

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Each panel's error is estimated by comparing the one-panel and two-panel rules; the
/// worst panel is bisected until the summed estimate meets `tol` or the rounding level,
/// which for oscillatory integrands is set by `int |f|` rather than `|int f|`.
pub fn integrate_adaptive<V: QuadValue, F: FnMut(f64) -> V>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<V> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(V::zero());
    }
    let whole = gauss_panel(&mut f, a, b);
    let (first, mut l0, mut r0) = estimate(&mut f, a, b, whole);
    let mut halves = vec![(l0, r0)];
    let mut heap = BinaryHeap::new();
    let mut total_err = first.err;
    let mut total_mass = first.mass;
    heap.push((first, 0usize));
    for _ in 0..MAX_PANELS {
        let sum = heap.iter().fold(V::zero(), |acc, (p, _)| acc + p.value);
        if !(sum.magnitude().is_finite() && total_err.is_finite()) {
            break;
        }
        if total_err <= tol.max(16.0 * f64::EPSILON * total_mass) {
            return Ok(sum);
        }
        let (worst, idx) = heap.pop().expect("nonempty heap");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            break;
        }
        (l0, r0) = halves[idx];
        total_err -= worst.err;
        total_mass -= worst.mass;
        let (pl, ll, lr) = estimate(&mut f, worst.a, m, l0);
        let (pr, rl, rr) = estimate(&mut f, m, worst.b, r0);
        total_err += pl.err + pr.err;
        total_mass += pl.mass + pr.mass;
        halves[idx] = (ll, lr);
        halves.push((rl, rr));
        heap.push((pl, idx));
        heap.push((pr, halves.len() - 1));
        // guard against drift in the running sum
        total_err = total_err.max(0.0);
    }
    Err(Error::Accuracy(format!(
        "adaptive quadrature on [{a:e}, {b:e}] did not reach {tol:e}"
    )))
}

/// Adaptive integration over consecutive panels `[breaks[i], breaks[i+1]]`, with the
/// tolerance shared equally among panels.
pub fn integrate_panels<V: QuadValue, F: FnMut(f64) -> V>(
    mut f: F,
    breaks: &[f64],
    tol: f64,
) -> Result<V> {
    let panels = breaks.len().saturating_sub(1).max(1);
    let each = tol / panels as f64;
    let mut acc = V::zero();
    for w in breaks.windows(2) {
        acc = acc + integrate_adaptive(&mut f, w[0], w[1], each)?;
    }
    Ok(acc)
}
