//! Declarative experiment descriptions and the flat `key = value` config format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::densities::sigma_f_sq_quadrature;
use crate::error::{Error, Result};
use crate::exact::Polynomial;
use crate::paths::MAX_PATH_LEN;

/// Default ceiling on the `sum_n n^2 * replicates` work estimate.
pub const DEFAULT_MAX_OPS: f64 = 1e10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SemicircleLaw,
    CltFixedBeta,
    CltGrowingNbeta,
    AlphaRegime,
    VarianceScan,
    MartingaleCheck,
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.trim().to_string()))
            .map_err(|_| Error::Parse(format!("unknown experiment kind '{s}'")))
    }
}

/// How `beta` depends on `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaRule {
    Fixed(f64),
    /// `n beta` held at the given value.
    NbetaFixed(f64),
    /// `beta = n^(g - 1)`, so `n beta = n^g`.
    NbetaGrowth(f64),
}

impl BetaRule {
    pub fn beta(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            BetaRule::Fixed(b) => b,
            BetaRule::NbetaFixed(nb) => nb / nf,
            BetaRule::NbetaGrowth(g) => nf.powf(g - 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedFunction {
    /// `(x - 1/2) |x - 1/2|`: continuously differentiable, not twice.
    AbsShifted,
    Exp,
    Sin,
}

impl NamedFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            NamedFunction::AbsShifted => (x - 0.5) * (x - 0.5).abs(),
            NamedFunction::Exp => x.exp(),
            NamedFunction::Sin => x.sin(),
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            NamedFunction::AbsShifted => 2.0 * (x - 0.5).abs(),
            NamedFunction::Exp => x.exp(),
            NamedFunction::Sin => x.cos(),
        }
    }
}

impl std::str::FromStr for NamedFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.trim().to_string()))
            .map_err(|_| Error::Parse(format!("unknown test function '{s}'")))
    }
}

/// The `f` in `S_n = sum_j f(lambda_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    Monomial(usize),
    /// Comma-separated rational coefficients, constant term first.
    Polynomial(String),
    Named(NamedFunction),
}

impl TestFunction {
    /// The polynomial, when `f` is one.
    pub fn polynomial(&self) -> Result<Option<Polynomial>> {
        match self {
            TestFunction::Monomial(r) => Ok(Some(Polynomial::monomial(*r))),
            TestFunction::Polynomial(text) => Polynomial::parse(text).map(Some),
            TestFunction::Named(_) => Ok(None),
        }
    }

    /// A plain evaluator for `f`.
    pub fn evaluator(&self) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        Ok(match self {
            TestFunction::Named(g) => {
                let g = *g;
                Box::new(move |x| g.eval(x))
            }
            _ => {
                let p = self.polynomial()?.expect("polynomial test function");
                let c = p.coeffs_f64();
                Box::new(move |x| crate::exact::poly::eval_horner(&c, x))
            }
        })
    }

    /// `sigma_f^2` from the double-integral formula.
    pub fn sigma_sq_quadrature(&self) -> Result<f64> {
        match self {
            TestFunction::Named(g) => {
                let g = *g;
                sigma_f_sq_quadrature(|x| g.eval(x), |x| g.derivative(x))
            }
            _ => {
                let p = self.polynomial()?.expect("polynomial test function");
                let dp = p.derivative();
                sigma_f_sq_quadrature(|x| p.eval(x), |x| dp.eval(x))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n_list: Vec<usize>,
    pub beta_rule: BetaRule,
    pub test_function: TestFunction,
    pub replicates: usize,
    pub seed: u64,
    /// Limit parameter of the `n beta -> 2 alpha` regime; defaults to `n beta / 2`
    /// under a fixed-`n beta` rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Override of [`DEFAULT_MAX_OPS`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ops: Option<f64>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidParameter("replicates must be >= 2".into()));
        }
        if self.n_list.is_empty() {
            return Err(Error::InvalidParameter("n_list must be nonempty".into()));
        }
        for &n in &self.n_list {
            if n == 0 {
                return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
            }
            let b = self.beta_rule.beta(n);
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "beta rule gives beta = {b} at n = {n}"
                )));
            }
        }
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidParameter(format!("alpha must be positive, got {a}")));
            }
        }
        if let Some(p) = self.test_function.polynomial()? {
            if 2 * p.degree() > MAX_PATH_LEN {
                return Err(Error::PathCapExceeded {
                    requested: 2 * p.degree(),
                    cap: MAX_PATH_LEN,
                });
            }
        }
        Ok(())
    }

    /// `sum_n n^2 * replicates`, the work estimate checked against the budget.
    pub fn ops_estimate(&self) -> f64 {
        self.n_list
            .iter()
            .map(|&n| (n as f64) * (n as f64) * self.replicates as f64)
            .sum()
    }

    pub fn effective_alpha(&self) -> Option<f64> {
        self.alpha.or(match self.beta_rule {
            BetaRule::NbetaFixed(nb) => Some(0.5 * nb),
            _ => None,
        })
    }

    /// Build a spec from flat config entries. Recognized keys: `kind`, `n_list` (or
    /// `n`), one of `beta` / `nbeta` / `nbeta_growth`, one of `poly` / `monomial` /
    /// `function`, `replicates` (or `reps`), `seed`, `alpha`, `max_ops`.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let kind: ExperimentKind = cfg.require("kind")?.parse()?;
        let n_text = cfg.get("n_list").or_else(|| cfg.get("n")).ok_or_else(|| {
            Error::Parse("missing key 'n_list'".into())
        })?;
        let n_list = n_text
            .split(',')
            .map(|t| parse_num::<usize>("n_list", t))
            .collect::<Result<Vec<_>>>()?;
        let rules: Vec<BetaRule> = [
            cfg.get("beta").map(|v| parse_num("beta", v).map(BetaRule::Fixed)),
            cfg.get("nbeta").map(|v| parse_num("nbeta", v).map(BetaRule::NbetaFixed)),
            cfg.get("nbeta_growth")
                .map(|v| parse_num("nbeta_growth", v).map(BetaRule::NbetaGrowth)),
        ]
        .into_iter()
        .flatten()
        .collect::<Result<_>>()?;
        let beta_rule = match rules.as_slice() {
            [r] => *r,
            [] => return Err(Error::Parse("one of beta, nbeta, nbeta_growth is required".into())),
            _ => return Err(Error::Parse("beta, nbeta and nbeta_growth are exclusive".into())),
        };
        let funcs: Vec<TestFunction> = [
            cfg.get("poly").map(|v| Ok(TestFunction::Polynomial(v.to_string()))),
            cfg.get("monomial").map(|v| parse_num("monomial", v).map(TestFunction::Monomial)),
            cfg.get("function").map(|v| v.parse().map(TestFunction::Named)),
        ]
        .into_iter()
        .flatten()
        .collect::<Result<_>>()?;
        let test_function = match funcs.as_slice() {
            [f] => f.clone(),
            [] => return Err(Error::Parse("one of poly, monomial, function is required".into())),
            _ => return Err(Error::Parse("poly, monomial and function are exclusive".into())),
        };
        let reps = cfg
            .get("replicates")
            .or_else(|| cfg.get("reps"))
            .ok_or_else(|| Error::Parse("missing key 'replicates'".into()))?;
        let spec = ExperimentSpec {
            kind,
            n_list,
            beta_rule,
            test_function,
            replicates: parse_num("replicates", reps)?,
            seed: cfg.get("seed").map_or(Ok(0), |v| parse_num("seed", v))?,
            alpha: cfg.get("alpha").map(|v| parse_num("alpha", v)).transpose()?,
            max_ops: cfg.get("max_ops").map(|v| parse_num("max_ops", v)).transpose()?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, text: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for '{key}': '{text}'")))
}

/// Flat `key = value` settings; later assignments win.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Parse `key = value` lines. `#` starts a comment; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
            }
            cfg.set(k, v.trim());
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn remove(&mut self, key: &str) {
        self.entries.remove(key);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("missing key '{key}'")))
    }
}
