//! Exact polynomial types.
//!
//! [`BivarPoly`] is a polynomial in `u = 1/(n beta)` and `beta` with rational
//! coefficients. [`Polynomial`] is a univariate test polynomial `p(x)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational from an `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidParameter(format!("not a finite number: {x}")))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3"`, `"-2/5"` or a decimal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if !mantissa.chars().any(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if shift >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-shift) as usize))
    })
}

fn rat(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}

/// Polynomial in `(u, beta)`; keys are `(power of u, power of beta)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl BivarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: BigRational, u_pow: u32, beta_pow: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((u_pow, beta_pow), c);
        }
        Self { terms }
    }

    pub fn u() -> Self {
        Self::monomial(BigRational::one(), 1, 0)
    }

    pub fn beta() -> Self {
        Self::monomial(BigRational::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, u_pow: u32, beta_pow: u32) -> BigRational {
        self.terms
            .get(&(u_pow, beta_pow))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Nonzero terms in `(u power, beta power)` order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &BigRational)> {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn u_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).max()
    }

    /// Coefficient of `u^k` as a polynomial in `beta`: `beta power -> coefficient`.
    pub fn u_coefficient(&self, k: u32) -> BTreeMap<u32, BigRational> {
        self.terms
            .range((k, 0)..=(k, u32::MAX))
            .map(|(&(_, j), c)| (j, c.clone()))
            .collect()
    }

    /// Degree in beta of the coefficient of `u^k`; `None` when that coefficient is zero.
    pub fn beta_degree_of(&self, k: u32) -> Option<u32> {
        self.u_coefficient(k).keys().copied().max()
    }

    /// Lowest beta power in the coefficient of `u^k`.
    pub fn beta_valuation_of(&self, k: u32) -> Option<u32> {
        self.u_coefficient(k).keys().copied().min()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Divides by `u^du beta^db`; fails if some term has lower powers.
    pub fn shift_down(&self, du: u32, db: u32) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (&(i, j), c) in &self.terms {
            if i < du || j < db {
                return Err(Error::Structure(format!(
                    "term u^{i} b^{j} is not divisible by u^{du} b^{db}"
                )));
            }
            terms.insert((i - du, j - db), c.clone());
        }
        Ok(Self { terms })
    }

    /// Sets `beta` to a constant, leaving a polynomial in `u` (stored with beta power 0).
    pub fn substitute_beta(&self, beta: &BigRational) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            let v = c * num_traits::pow(beta.clone(), j as usize);
            out.add_term(i, 0, v);
        }
        out
    }

    pub fn eval_exact(&self, u: &BigRational, beta: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&(i, j), c) in &self.terms {
            acc += c
                * num_traits::pow(u.clone(), i as usize)
                * num_traits::pow(beta.clone(), j as usize);
        }
        acc
    }

    /// Evaluates exactly at the given doubles and rounds once at the end.
    pub fn eval(&self, u: f64, beta: f64) -> f64 {
        match (BigRational::from_float(u), BigRational::from_float(beta)) {
            (Some(u), Some(b)) => rational_to_f64(&self.eval_exact(&u, &b)),
            _ => f64::NAN,
        }
    }

    /// Value at `u = 1/(n beta)`.
    pub fn eval_at(&self, n: usize, beta: f64) -> f64 {
        match BigRational::from_float(beta) {
            Some(b) if !b.is_zero() => {
                let u = (b.clone() * rat(n as i64)).recip();
                rational_to_f64(&self.eval_exact(&u, &b))
            }
            _ => f64::NAN,
        }
    }

    fn add_term(&mut self, i: u32, j: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((i, j)).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(i, j));
        }
    }
}

impl Add<&BivarPoly> for &BivarPoly {
    type Output = BivarPoly;
    fn add(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Sub<&BivarPoly> for &BivarPoly {
    type Output = BivarPoly;
    fn sub(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, -c.clone());
        }
        out
    }
}

impl Mul<&BivarPoly> for &BivarPoly {
    type Output = BivarPoly;
    fn mul(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = BivarPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &BivarPoly {
    type Output = BivarPoly;
    fn neg(self) -> BivarPoly {
        BivarPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<BivarPoly> for BivarPoly {
            type Output = BivarPoly;
            fn $m(self, rhs: BivarPoly) -> BivarPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&BivarPoly> for BivarPoly {
            type Output = BivarPoly;
            fn $m(self, rhs: &BivarPoly) -> BivarPoly {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::iter::Sum for BivarPoly {
    fn sum<I: Iterator<Item = BivarPoly>>(iter: I) -> Self {
        iter.fold(BivarPoly::zero(), |acc, x| &acc + &x)
    }
}

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// `c * b^j` with the sign handled by the caller; `c` is positive here.
fn fmt_monomial(c: &BigRational, var: &str, pow: u32, omit_one: bool) -> String {
    let var_part = match pow {
        0 => String::new(),
        1 => var.to_string(),
        p => format!("{var}^{p}"),
    };
    if var_part.is_empty() {
        fmt_rational(c)
    } else if c.is_one() && omit_one {
        var_part
    } else {
        format!("{}*{}", fmt_rational(c), var_part)
    }
}

/// Renders a signed sum of `(body, negative)` parts as `a + b - c`.
fn join_signed(parts: &[(String, bool)]) -> String {
    let mut s = String::new();
    for (k, (body, neg)) in parts.iter().enumerate() {
        match (k, neg) {
            (0, false) => s.push_str(body),
            (0, true) => {
                s.push('-');
                s.push_str(body);
            }
            (_, false) => {
                s.push_str(" + ");
                s.push_str(body);
            }
            (_, true) => {
                s.push_str(" - ");
                s.push_str(body);
            }
        }
    }
    s
}

impl fmt::Display for BivarPoly {
    /// Groups terms by power of `u`, rendering each coefficient as a polynomial in
    /// `b` (beta): `1 + (2 - b)*u`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut parts = Vec::new();
        let mut k_values: Vec<u32> = self.terms.keys().map(|k| k.0).collect();
        k_values.dedup();
        for k in k_values {
            let coeff = self.u_coefficient(k);
            let u_part = match k {
                0 => String::new(),
                1 => "u".to_string(),
                p => format!("u^{p}"),
            };
            if coeff.len() == 1 {
                let (&j, c) = coeff.iter().next().unwrap();
                let neg = c.is_negative();
                let c = c.abs();
                let body = if k == 0 {
                    fmt_monomial(&c, "b", j, true)
                } else if j == 0 {
                    if c.is_one() {
                        u_part
                    } else {
                        format!("{}*{}", fmt_rational(&c), u_part)
                    }
                } else {
                    format!("{}*{}", fmt_monomial(&c, "b", j, true), u_part)
                };
                parts.push((body, neg));
            } else {
                let inner: Vec<(String, bool)> = coeff
                    .iter()
                    .map(|(&j, c)| (fmt_monomial(&c.abs(), "b", j, true), c.is_negative()))
                    .collect();
                let inner = join_signed(&inner);
                let body = if k == 0 {
                    inner
                } else {
                    format!("({inner})*{u_part}")
                };
                parts.push((body, false));
            }
        }
        f.write_str(&join_signed(&parts))
    }
}

/// Univariate polynomial `c_0 + c_1 x + ... + c_m x^m` with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn monomial(r: usize) -> Self {
        let mut c = vec![BigRational::zero(); r + 1];
        c[r] = BigRational::one();
        Self::new(c)
    }

    /// Comma-separated coefficients, constant term first: `"0,0,1"` is `x^2`.
    pub fn parse(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, r: usize) -> BigRational {
        self.coeffs.get(r).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(r, c)| c * rat(r as i64))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::default();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    /// Horner evaluation in floating point.
    pub fn eval(&self, x: f64) -> f64 {
        eval_horner(&self.coeffs_f64(), x)
    }
}

pub(crate) fn eval_horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<(String, bool)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(r, c)| (fmt_monomial(&c.abs(), "x", r as u32, true), c.is_negative()))
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&join_signed(&parts))
        }
    }
}
