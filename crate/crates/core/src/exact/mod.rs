//! Exact finite-n moments of the tridiagonal model as polynomials in `u = 1/(n beta)`
//! and `beta`.
//!
//! Every entry moment depends on `n` only through `n beta` and `i beta`:
//!
//! ```text
//! E[a_i^alpha]      = (alpha-1)!! (2u)^(alpha/2)            (zero for odd alpha)
//! E[b_i^(2 gamma)]  = prod_{t<gamma} (1 - i beta u + 2 t u)
//! ```
//!
//! so sums of path weights become exact [`BivarPoly`] values. The formulas assume
//! every Motzkin path involved fits in the matrix, i.e. `n >= r/2 + 1` for moments
//! of order `r`; [`required_n`] gives the bound and the evaluating helpers enforce it.
//!
//! Results are checked against the degree structure they must have. A violation is
//! an engine bug and surfaces as [`Error::Structure`] instead of a silent value.

pub mod poly;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::TridiagonalMatrix;
use crate::paths::{
    admissible_window, enumerate_closed, enumerate_motzkin, exponent_profile, ClosedPath,
    ExponentProfile, MAX_PATH_LEN,
};
use crate::randsrc::{gaussian_moment_exact, gaussian_moment_f64};

pub use poly::{parse_rational, rational_from_f64, rational_to_f64, BivarPoly, Polynomial};

/// Key of an entry moment `E[a_site^alpha b_site^(2 gamma)]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EntryMomentKey {
    pub site: u32,
    pub alpha: u32,
    pub gamma: u32,
}

fn rat(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}

/// Smallest dimension for which moment formulas of order `r` are exact.
pub fn required_n(r: usize) -> usize {
    r / 2 + 1
}

fn check_len(r: usize) -> Result<()> {
    if r > MAX_PATH_LEN {
        return Err(Error::PathCapExceeded {
            requested: r,
            cap: MAX_PATH_LEN,
        });
    }
    Ok(())
}

fn entry_cache() -> &'static Mutex<HashMap<EntryMomentKey, BivarPoly>> {
    static CACHE: OnceLock<Mutex<HashMap<EntryMomentKey, BivarPoly>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `E[a_i^alpha b_i^(2 gamma)]` for 1-based site `i`.
pub fn entry_moment(site: u32, alpha: u32, gamma: u32) -> BivarPoly {
    let key = EntryMomentKey { site, alpha, gamma };
    if let Some(p) = entry_cache().lock().unwrap().get(&key) {
        return p.clone();
    }
    let p = entry_moment_uncached(key);
    entry_cache().lock().unwrap().insert(key, p.clone());
    p
}

fn entry_moment_uncached(k: EntryMomentKey) -> BivarPoly {
    if k.alpha % 2 == 1 {
        return BivarPoly::zero();
    }
    let gauss = BivarPoly::monomial(
        gaussian_moment_exact(k.alpha) * num_traits::pow(rat(2), (k.alpha / 2) as usize),
        k.alpha / 2,
        0,
    );
    let mut acc = gauss;
    for t in 0..k.gamma {
        // 1 - i beta u + 2 t u
        let factor = &(&BivarPoly::one() - &BivarPoly::monomial(rat(k.site as i64), 1, 1))
            + &BivarPoly::monomial(rat(2 * t as i64), 1, 0);
        acc = &acc * &factor;
    }
    acc
}

/// Floating-point entry moment at concrete `(n, beta)`.
pub fn entry_moment_f64(n: usize, beta: f64, site: usize, alpha: u32, gamma: u32) -> f64 {
    if alpha % 2 == 1 {
        return 0.0;
    }
    let u = 1.0 / (n as f64 * beta);
    let mut acc = gaussian_moment_f64(alpha) * (2.0 * u).powi((alpha / 2) as i32);
    let base = 1.0 - site as f64 / n as f64;
    for t in 0..gamma {
        acc *= base + 2.0 * t as f64 * u;
    }
    acc
}

/// Per-level `(alpha, gamma)` of a Motzkin path, level 0 first.
type LevelProfile = Vec<(u32, u32)>;

fn motzkin_profiles(r: usize) -> Result<Vec<LevelProfile>> {
    Ok(enumerate_motzkin(r)?
        .iter()
        .map(|w| {
            let p = exponent_profile(w);
            (0..=p.top()).map(|l| (p.alpha(l), p.gamma(l))).collect()
        })
        .collect())
}

fn combine(a: &LevelProfile, b: &LevelProfile) -> LevelProfile {
    let len = a.len().max(b.len());
    (0..len)
        .map(|l| {
            let (a1, g1) = a.get(l).copied().unwrap_or((0, 0));
            let (a2, g2) = b.get(l).copied().unwrap_or((0, 0));
            (a1 + a2, g1 + g2)
        })
        .collect()
}

/// Expectation of the path weight with the given per-level exponents, level `l`
/// placed at site `l + 1`.
fn profile_expectation(profile: &LevelProfile) -> BivarPoly {
    let mut acc = BivarPoly::one();
    for (l, &(alpha, gamma)) in profile.iter().enumerate() {
        if alpha == 0 && gamma == 0 {
            continue;
        }
        let m = entry_moment(l as u32 + 1, alpha, gamma);
        if m.is_zero() {
            return m;
        }
        acc = &acc * &m;
    }
    acc
}

/// Sums expectations over a multiset of profiles. Profiles with an odd
/// alpha anywhere vanish and are skipped before any polynomial work.
fn sum_profiles(counts: HashMap<LevelProfile, u64>) -> BivarPoly {
    let mut keyed: Vec<(LevelProfile, u64)> = counts
        .into_iter()
        .filter(|(p, _)| p.iter().all(|(a, _)| a % 2 == 0))
        .collect();
    keyed.sort();
    let mut acc = BivarPoly::zero();
    for (p, count) in keyed {
        let e = profile_expectation(&p);
        acc = &acc + &e.scale(&rat(count as i64));
    }
    acc
}

fn product_cache() -> &'static Mutex<HashMap<(usize, usize), BivarPoly>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), BivarPoly>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `E[<mu_n, x^r>]`, a polynomial of u-degree at most `r/2` whose `u^k`
/// coefficient has beta-degree at most `k`. Zero for odd `r`.
pub fn spectral_moment_expected(r: usize) -> Result<BivarPoly> {
    spectral_moment_product_expected(r, 0)
}

/// `E[<mu_n, x^r> <mu_n, x^s>]`. Both factors are functions of the same entries, so
/// the exponents of each path pair are added site by site before taking expectations.
pub fn spectral_moment_product_expected(r: usize, s: usize) -> Result<BivarPoly> {
    check_len(r + s)?;
    let key = (r.max(s), r.min(s));
    if let Some(p) = product_cache().lock().unwrap().get(&key) {
        return Ok(p.clone());
    }
    let value = if (r + s) % 2 == 1 {
        BivarPoly::zero()
    } else {
        let left = motzkin_profiles(key.0)?;
        let right = motzkin_profiles(key.1)?;
        let mut counts: HashMap<LevelProfile, u64> = HashMap::new();
        for a in &left {
            for b in &right {
                *counts.entry(combine(a, b)).or_insert(0) += 1;
            }
        }
        sum_profiles(counts)
    };
    check_moment_structure(&value, r + s)?;
    product_cache().lock().unwrap().insert(key, value.clone());
    Ok(value)
}

/// `E[<L_n, x^r>]`, equal to the spectral-measure moment because `E[q_j^2] = 1/n`
/// and the weights are independent of the eigenvalues.
pub fn empirical_moment_expected(r: usize) -> Result<BivarPoly> {
    spectral_moment_expected(r)
}

fn check_moment_structure(p: &BivarPoly, order: usize) -> Result<()> {
    if order % 2 == 1 && !p.is_zero() {
        return Err(Error::Structure(format!(
            "odd-order moment {order} is nonzero: {p}"
        )));
    }
    if let Some(d) = p.u_degree() {
        if d as usize > order / 2 {
            return Err(Error::Structure(format!(
                "moment of order {order} has u-degree {d} > {}",
                order / 2
            )));
        }
    }
    for (k, j, _) in p.terms() {
        if j > k {
            return Err(Error::Structure(format!(
                "moment of order {order}: coefficient of u^{k} has beta-degree {j} > {k}"
            )));
        }
    }
    Ok(())
}

/// `E[<mu_n, p>]` as a polynomial in `(u, beta)`.
pub fn expected_linear(p: &Polynomial) -> Result<BivarPoly> {
    let mut acc = BivarPoly::zero();
    for (r, c) in p.coeffs().iter().enumerate() {
        if !c.is_zero() {
            acc = &acc + &spectral_moment_expected(r)?.scale(c);
        }
    }
    Ok(acc)
}

/// Exact `Var[<L_n, p>]`.
///
/// From the Dirichlet structure of the weights,
/// `Var = (1 + 2u) E[<mu,p>^2] - 2u E[<mu,p^2>] - E[<mu,p>]^2`. The result must have the
/// form `sum_{k=2}^{m+1} beta l_k(beta) u^k` with `deg l_k <= k - 2`; anything else is
/// reported as [`Error::Structure`].
pub fn variance_linear_stat(p: &Polynomial) -> Result<BivarPoly> {
    let m = p.degree();
    check_len(2 * m)?;
    if m == 0 {
        return Ok(BivarPoly::zero());
    }
    let c = p.coeffs();
    let mut second = BivarPoly::zero();
    for r in 0..=m {
        for s in r..=m {
            if c[r].is_zero() || c[s].is_zero() {
                continue;
            }
            let mut w = &c[r] * &c[s];
            if r != s {
                w *= rat(2);
            }
            second = &second + &spectral_moment_product_expected(r, s)?.scale(&w);
        }
    }
    let of_square = expected_linear(&p.mul(p))?;
    let mean = expected_linear(p)?;
    let u = BivarPoly::u();
    let two_u = u.scale(&rat(2));
    let var = &(&(&(&BivarPoly::one() + &two_u) * &second) - &(&two_u * &of_square))
        - &(&mean * &mean);
    check_variance_structure(&var, m)?;
    Ok(var)
}

fn check_variance_structure(v: &BivarPoly, m: usize) -> Result<()> {
    for (k, j, c) in v.terms() {
        if k < 2 {
            return Err(Error::Structure(format!(
                "variance has a nonzero u^{k} term ({c}*b^{j})"
            )));
        }
        if k as usize > m + 1 {
            return Err(Error::Structure(format!(
                "variance of a degree-{m} polynomial has a u^{k} term"
            )));
        }
        if j == 0 {
            return Err(Error::Structure(format!(
                "coefficient of u^{k} in the variance is not divisible by beta"
            )));
        }
        if j + 1 > k {
            return Err(Error::Structure(format!(
                "coefficient of u^{k} in the variance has beta-degree {j} > {}",
                k - 1
            )));
        }
    }
    Ok(())
}

/// `l_{p;k}(beta)`: the coefficients with `Var = sum_k beta l_k(beta) u^k`, returned as
/// `BivarPoly` in beta alone (u-power 0), for `k = 0..=m+1`.
pub fn variance_coefficients(p: &Polynomial) -> Result<Vec<BivarPoly>> {
    let var = variance_linear_stat(p)?;
    let top = p.degree() + 1;
    let mut out = vec![BivarPoly::zero(); top + 1];
    for (k, j, c) in var.terms() {
        out[k as usize] = &out[k as usize] + &BivarPoly::monomial(c.clone(), 0, j - 1);
    }
    Ok(out)
}

/// Limit of `n^2 beta Var[<L_n, p>]` as `n beta -> infinity`: the coefficient `l_{p;2}`,
/// which must not depend on beta.
pub fn sigma_p_sq(p: &Polynomial) -> Result<BigRational> {
    let l = variance_coefficients(p)?;
    let Some(l2) = l.get(2) else {
        return Ok(BigRational::zero());
    };
    match l2.beta_degree_of(0) {
        None if l2.is_zero() => Ok(BigRational::zero()),
        Some(0) => Ok(l2.coeff(0, 0)),
        _ => Err(Error::Structure(format!(
            "leading variance coefficient depends on beta: {l2}"
        ))),
    }
}

/// Limit of `n^2 beta Var[<L_n, p>]` as `n beta -> 2 alpha`:
/// `sum_k l_{p;k}(0) / (2 alpha)^(k-2)`.
pub fn sigma_p_alpha_sq(p: &Polynomial, alpha: &BigRational) -> Result<BigRational> {
    if alpha <= &BigRational::zero() {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let l = variance_coefficients(p)?;
    let two_alpha = alpha * rat(2);
    let mut acc = BigRational::zero();
    for (k, lk) in l.iter().enumerate().skip(2) {
        let at_zero = lk.coeff(0, 0);
        if !at_zero.is_zero() {
            acc += at_zero / num_traits::pow(two_alpha.clone(), k - 2);
        }
    }
    Ok(acc)
}

/// One point of a Poincaré-inequality check.
#[derive(Clone, Debug, PartialEq)]
pub struct PoincarePoint {
    pub n: usize,
    pub beta: f64,
    /// `n^2 beta Var[<L_n, p>]`
    pub lhs: f64,
    /// `2 E[<L_n, (p')^2>]`
    pub rhs: f64,
    /// `rhs - lhs`, computed exactly before rounding.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoincareReport {
    pub points: Vec<PoincarePoint>,
}

impl PoincareReport {
    pub fn all_hold(&self) -> bool {
        self.points.iter().all(|p| p.holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &PoincarePoint> {
        self.points.iter().filter(|p| !p.holds)
    }
}

/// Checks `n^2 beta Var[<L_n, p>] <= 2 E[<L_n, (p')^2>]` exactly at each `(n, beta)`.
pub fn poincare_check(p: &Polynomial, grid: &[(usize, f64)]) -> Result<PoincareReport> {
    let m = p.degree();
    // Var/(beta u^2) = n^2 beta Var
    let lhs_poly = variance_linear_stat(p)?.shift_down(2, 1)?;
    let dp = p.derivative();
    let rhs_poly = expected_linear(&dp.mul(&dp))?.scale(&rat(2));
    let mut points = Vec::with_capacity(grid.len());
    for &(n, beta) in grid {
        let need = required_n(2 * m);
        if n < need {
            return Err(Error::OutsideValidity { n, required: need });
        }
        let b = rational_from_f64(beta)?;
        if b <= BigRational::zero() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        let u = (&b * rat(n as i64)).recip();
        let lhs = lhs_poly.eval_exact(&u, &b);
        let rhs = rhs_poly.eval_exact(&u, &b);
        let margin = &rhs - &lhs;
        points.push(PoincarePoint {
            n,
            beta,
            lhs: rational_to_f64(&lhs),
            rhs: rational_to_f64(&rhs),
            margin: rational_to_f64(&margin),
            holds: margin >= BigRational::zero(),
        });
    }
    Ok(PoincareReport { points })
}

/// `E[sum_j p(lambda_j)] = n E[<L_n, p>]` at concrete `(n, beta)`.
pub fn expected_trace(p: &Polynomial, n: usize, beta: f64) -> Result<f64> {
    let need = required_n(p.degree());
    if n < need {
        return Err(Error::OutsideValidity { n, required: need });
    }
    Ok(n as f64 * expected_linear(p)?.eval_at(n, beta))
}

/// Exact `Var[<L_n, p>]` at concrete `(n, beta)`.
pub fn variance_at(p: &Polynomial, n: usize, beta: f64) -> Result<f64> {
    let need = required_n(2 * p.degree());
    if n < need {
        return Err(Error::OutsideValidity { n, required: need });
    }
    Ok(variance_linear_stat(p)?.eval_at(n, beta))
}

/// A closed path with its exponent profile, precomputed for the martingale sums.
#[derive(Clone, Debug)]
pub struct ProfiledPath {
    pub path: ClosedPath,
    pub profile: ExponentProfile,
}

/// Closed paths of length `r` with their profiles, cached for `r <= 8`.
pub fn profiled_closed_paths(r: usize) -> Result<&'static [ProfiledPath]> {
    const CACHED: usize = 8;
    static TABLES: OnceLock<Vec<Vec<ProfiledPath>>> = OnceLock::new();
    if r > CACHED {
        return Err(Error::PathCapExceeded {
            requested: r,
            cap: CACHED,
        });
    }
    let tables = TABLES.get_or_init(|| {
        (0..=CACHED)
            .map(|len| {
                enumerate_closed(len)
                    .expect("within cap")
                    .into_iter()
                    .map(|path| {
                        let profile = exponent_profile(&path);
                        ProfiledPath { path, profile }
                    })
                    .collect()
            })
            .collect()
    });
    Ok(&tables[r])
}

fn realized_factor(t: &TridiagonalMatrix, site: usize, alpha: u32, gamma: u32) -> f64 {
    let mut v = 1.0;
    if alpha > 0 {
        v *= t.a(site).powi(alpha as i32);
    }
    if gamma > 0 {
        v *= t.b(site).powi(2 * gamma as i32);
    }
    v
}

fn delta_with_profile(
    profile: &ExponentProfile,
    j: i64,
    k: usize,
    t: &TridiagonalMatrix,
) -> f64 {
    let n = t.n();
    let beta = t.beta();
    let lo = j + profile.base() as i64;
    let hi = j + profile.top() as i64;
    let ki = k as i64;
    if ki < lo || ki > hi {
        return 0.0;
    }
    let center_level = (ki - j) as i32;
    let (ak, gk) = (profile.alpha(center_level), profile.gamma(center_level));
    if ak == 0 && gk == 0 {
        return 0.0;
    }
    let mut before = 1.0;
    let mut after = 1.0;
    for (level, alpha, gamma) in profile.entries() {
        let site = (j + level as i64) as usize;
        match site.cmp(&k) {
            std::cmp::Ordering::Less => before *= realized_factor(t, site, alpha, gamma),
            std::cmp::Ordering::Greater => after *= entry_moment_f64(n, beta, site, alpha, gamma),
            std::cmp::Ordering::Equal => {}
        }
    }
    let center = realized_factor(t, k, ak, gk) - entry_moment_f64(n, beta, k, ak, gk);
    before * center * after
}

/// `Delta_k(xi_w) = E[xi_w | F_k] - E[xi_w | F_{k-1}]` for `w` placed at start `j`,
/// where `F_k` is generated by `a_1, b_1, ..., a_k, b_k`.
///
/// Equal to `xi^(-) (a_k^alpha_k b_k^(2 gamma_k) - E[...]) E[xi^(+)]`: realized entries
/// below `k`, exact expectations above it.
pub fn martingale_delta(w: &ClosedPath, j: i64, k: usize, t: &TridiagonalMatrix) -> Result<f64> {
    check_sampled(t)?;
    if !admissible_window(w, t.n()).contains(j) {
        return Err(Error::Inadmissible { start: j, n: t.n() });
    }
    if k == 0 || k > t.n() {
        return Err(Error::InvalidParameter(format!(
            "filtration index {k} outside 1..={}",
            t.n()
        )));
    }
    Ok(delta_with_profile(&exponent_profile(w), j, k, t))
}

fn check_sampled(t: &TridiagonalMatrix) -> Result<()> {
    if t.is_deterministic() {
        return Err(Error::InvalidParameter(
            "martingale increments need a sampled matrix with beta > 0".into(),
        ));
    }
    Ok(())
}

/// `Y_k = E[S_n | F_k] - E[S_n | F_{k-1}]` for `S_n = Tr p(T)`.
///
/// Sums `c_r Delta_k(xi_{j+w})` over admissible paths of length `r <= deg p` whose span
/// covers site `k`; only entries within `deg p / 2` of `k` are read.
pub fn martingale_increment(k: usize, p: &Polynomial, t: &TridiagonalMatrix) -> Result<f64> {
    check_sampled(t)?;
    check_len(2 * p.degree())?;
    let n = t.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("filtration index {k} outside 1..={n}")));
    }
    let coeffs = p.coeffs_f64();
    let mut total = 0.0;
    for (r, &c) in coeffs.iter().enumerate().skip(1) {
        if c == 0.0 {
            continue;
        }
        let mut part = 0.0;
        for pp in profiled_closed_paths(r)? {
            let base = pp.profile.base() as i64;
            let top = pp.profile.top() as i64;
            let win = admissible_window(&pp.path, n);
            let first = win.first.max(k as i64 - top);
            let last = win.last.min(k as i64 - base);
            for j in first..=last {
                part += delta_with_profile(&pp.profile, j, k, t);
            }
        }
        total += c * part;
    }
    Ok(total)
}

/// All increments `Y_1, ..., Y_n`.
pub fn martingale_increments(p: &Polynomial, t: &TridiagonalMatrix) -> Result<Vec<f64>> {
    (1..=t.n()).map(|k| martingale_increment(k, p, t)).collect()
}

/// Rational helper: `p/q`.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests;
