//! Monte Carlo replicate loop and result persistence.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{ExperimentKind, ExperimentSpec, DEFAULT_MAX_OPS};
use super::stats::{ks_distance_to_normal, semicircle_ks, Summary, KS_MIN_SAMPLES};
use crate::eig::{eigenvalues, linear_statistic};
use crate::error::{Error, Result};
use crate::exact::{
    expected_trace, rational_from_f64, rational_to_f64, sigma_p_alpha_sq, sigma_p_sq, variance_at,
};
use crate::model::build_gbe;
use crate::randsrc::RngStream;

/// Largest tolerated fraction of failed replicates.
pub const MAX_FAILURE_RATE: f64 = 1e-3;

/// Stream id of replicate `rep` at position `size_idx` of the size list.
pub fn stream_id(size_idx: usize, rep: usize) -> u64 {
    ((size_idx as u64) << 32) | rep as u64
}

/// Outcome at one `(n, beta)`.
///
/// `mean`/`var` describe `<L_n, f> = S_n / n`. The scaled statistic is
/// `Z = sqrt(beta) (S_n - center)`, centered by the exact `E[S_n]` for polynomial `f`
/// and by the sample mean otherwise; `skew`, `ex_kurt` and `ks_normal` describe `Z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeResult {
    pub n: usize,
    pub beta: f64,
    /// Successful replicates.
    pub reps: usize,
    pub failures: usize,
    pub mean: f64,
    pub var: f64,
    pub mean_se: f64,
    pub var_se: f64,
    pub exact_mean: Option<f64>,
    pub exact_var: Option<f64>,
    pub scaled_mean: f64,
    pub scaled_var: f64,
    pub scaled_var_se: f64,
    pub skew: f64,
    pub ex_kurt: f64,
    pub ks_normal: f64,
    /// `sigma_p^2`, or `sigma_{p,alpha}^2` in the alpha regime.
    pub exact_sigma: Option<f64>,
    /// `n^2 beta Var[<L_n, p>]` at this `(n, beta)`.
    pub exact_scaled_var: Option<f64>,
    /// `sigma_f^2` from the double-integral formula (nbeta -> infinity limit).
    pub quadrature_sigma: Option<f64>,
    pub self_centered: bool,
    /// Semicircle KS distance of the first replicate's eigenvalues.
    pub semicircle_ks: Option<f64>,
    /// The scaled statistic per successful replicate, in stream order.
    #[serde(skip)]
    pub samples: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub per_size: Vec<SizeResult>,
    pub version: String,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl ExperimentResult {
    /// Pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the wall-time field zeroed, for reproducibility comparisons.
    pub fn to_json_without_timing(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_time_s = 0.0;
        copy.to_json()
    }

    /// CSV of the scaled statistics: `n,beta,index,value`.
    pub fn write_samples_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,beta,index,value")?;
        for s in &self.per_size {
            for (i, v) in s.samples.iter().enumerate() {
                writeln!(out, "{},{:.17e},{},{:.17e}", s.n, s.beta, i, v)?;
            }
        }
        Ok(())
    }
}

/// Run every `(n, beta)` of `spec`: independent replicate streams, eigenvalues,
/// linear statistic, summaries and exact references.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let budget = spec.max_ops.unwrap_or(DEFAULT_MAX_OPS);
    let estimate = spec.ops_estimate();
    if estimate > budget {
        return Err(Error::Budget { estimate, budget });
    }
    let start = Instant::now();
    let f = spec.test_function.evaluator()?;
    let poly = spec.test_function.polynomial()?;
    let quadrature_sigma = match spec.kind {
        ExperimentKind::AlphaRegime => None,
        _ => Some(spec.test_function.sigma_sq_quadrature()?),
    };
    let alpha = spec.effective_alpha();
    let exact_sigma = match (&poly, spec.kind, alpha) {
        (Some(p), ExperimentKind::AlphaRegime, Some(a)) => {
            Some(rational_to_f64(&sigma_p_alpha_sq(p, &rational_from_f64(a)?)?))
        }
        (Some(_), ExperimentKind::AlphaRegime, None) => None,
        (Some(p), _, _) => Some(rational_to_f64(&sigma_p_sq(p)?)),
        (None, _, _) => None,
    };

    let mut per_size = Vec::with_capacity(spec.n_list.len());
    for (idx, &n) in spec.n_list.iter().enumerate() {
        let beta = spec.beta_rule.beta(n);
        let draws: Vec<Result<(f64, Option<f64>)>> = (0..spec.replicates)
            .into_par_iter()
            .map(|rep| {
                let mut stream = RngStream::new(spec.seed, stream_id(idx, rep));
                let t = build_gbe(n, beta, &mut stream)?;
                let e = eigenvalues(&t)?;
                let ks = if rep == 0 && spec.kind == ExperimentKind::SemicircleLaw && n >= 10 {
                    Some(semicircle_ks(&e.values)?)
                } else {
                    None
                };
                Ok((linear_statistic(&e, &f), ks))
            })
            .collect();
        let mut stats = Vec::with_capacity(spec.replicates);
        let mut failures = 0usize;
        let mut first_ks = None;
        for (rep, d) in draws.into_iter().enumerate() {
            match d {
                Ok((s, ks)) => {
                    stats.push(s);
                    if rep == 0 {
                        first_ks = ks;
                    }
                }
                Err(Error::NoConvergence { .. }) => failures += 1,
                Err(e) => return Err(e),
            }
        }
        if failures as f64 > MAX_FAILURE_RATE * spec.replicates as f64 {
            return Err(Error::TooManyFailures {
                n,
                failures,
                replicates: spec.replicates,
            });
        }
        per_size.push(summarize(
            n,
            beta,
            &stats,
            failures,
            poly.as_ref(),
            exact_sigma,
            quadrature_sigma,
            first_ks,
        )?);
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        per_size,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    n: usize,
    beta: f64,
    stats: &[f64],
    failures: usize,
    poly: Option<&crate::exact::Polynomial>,
    exact_sigma: Option<f64>,
    quadrature_sigma: Option<f64>,
    semicircle_ks: Option<f64>,
) -> Result<SizeResult> {
    let nf = n as f64;
    let linear: Vec<f64> = stats.iter().map(|s| s / nf).collect();
    let lin = Summary::of(&linear);

    // exact references exist only inside the validity domain of the engine
    let (exact_mean_trace, exact_var) = match poly {
        Some(p) => match (expected_trace(p, n, beta), variance_at(p, n, beta)) {
            (Ok(m), Ok(v)) => (Some(m), Some(v)),
            (Err(Error::OutsideValidity { .. }), _) | (_, Err(Error::OutsideValidity { .. })) => {
                (None, None)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        },
        None => (None, None),
    };
    let center = exact_mean_trace.unwrap_or(lin.mean * nf);
    let sb = beta.sqrt();
    let scaled: Vec<f64> = stats.iter().map(|s| sb * (s - center)).collect();
    let z = Summary::of(&scaled);
    let sd = z.var.sqrt();
    let ks_normal = if scaled.len() >= KS_MIN_SAMPLES && sd > 0.0 {
        let std: Vec<f64> = scaled.iter().map(|v| (v - z.mean) / sd).collect();
        ks_distance_to_normal(&std)?
    } else {
        f64::NAN
    };
    Ok(SizeResult {
        n,
        beta,
        reps: stats.len(),
        failures,
        mean: lin.mean,
        var: lin.var,
        mean_se: lin.mean_se(),
        var_se: lin.var_se(),
        exact_mean: exact_mean_trace.map(|m| m / nf),
        exact_var,
        scaled_mean: z.mean,
        scaled_var: z.var,
        scaled_var_se: z.var_se(),
        skew: z.skew,
        ex_kurt: z.ex_kurt,
        ks_normal,
        exact_sigma,
        exact_scaled_var: exact_var.map(|v| v * nf * nf * beta),
        quadrature_sigma,
        self_centered: exact_mean_trace.is_none(),
        semicircle_ks,
        samples: scaled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::spec::{BetaRule, NamedFunction, TestFunction};

    fn spec(kind: ExperimentKind, n: Vec<usize>, rule: BetaRule, f: TestFunction, reps: usize) -> ExperimentSpec {
        ExperimentSpec {
            kind,
            n_list: n,
            beta_rule: rule,
            test_function: f,
            replicates: reps,
            seed: 17,
            alpha: None,
            max_ops: None,
        }
    }

    #[test]
    fn reproducible_json() {
        let s = spec(
            ExperimentKind::CltFixedBeta,
            vec![20, 40],
            BetaRule::Fixed(1.0),
            TestFunction::Polynomial("0,0,1".into()),
            300,
        );
        let a = run_experiment(&s).unwrap();
        let b = run_experiment(&s).unwrap();
        assert_eq!(a.to_json_without_timing().unwrap(), b.to_json_without_timing().unwrap());
        let json: serde_json::Value = serde_json::from_str(&a.to_json().unwrap()).unwrap();
        for key in ["spec", "per_size", "version", "seed"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        let row = &json["per_size"][0];
        for key in ["n", "beta", "mean", "var", "skew", "ex_kurt", "ks_normal", "exact_sigma", "reps", "failures"] {
            assert!(row.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn exact_references_for_polynomials() {
        let s = spec(
            ExperimentKind::CltFixedBeta,
            vec![30],
            BetaRule::Fixed(2.0),
            TestFunction::Monomial(2),
            2000,
        );
        let r = &run_experiment(&s).unwrap().per_size[0];
        assert!(!r.self_centered);
        assert_eq!(r.exact_mean, Some(1.0));
        assert!((r.mean - 1.0).abs() < 5.0 * r.mean_se);
        assert!((r.var - r.exact_var.unwrap()).abs() < 5.0 * r.var_se);
        assert_eq!(r.exact_sigma, Some(4.0));
        assert!((r.quadrature_sigma.unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(r.samples.len(), 2000);
    }

    #[test]
    fn self_centered_for_named_functions() {
        let s = spec(
            ExperimentKind::CltFixedBeta,
            vec![25],
            BetaRule::Fixed(1.0),
            TestFunction::Named(NamedFunction::Sin),
            200,
        );
        let r = &run_experiment(&s).unwrap().per_size[0];
        assert!(r.self_centered);
        assert!(r.exact_sigma.is_none());
        assert!(r.scaled_mean.abs() < 1e-12);
    }

    #[test]
    fn small_n_falls_back_to_sample_centering() {
        let s = spec(
            ExperimentKind::CltFixedBeta,
            vec![3],
            BetaRule::Fixed(1.0),
            TestFunction::Monomial(6),
            100,
        );
        let r = &run_experiment(&s).unwrap().per_size[0];
        assert!(r.self_centered && r.exact_var.is_none());
    }

    #[test]
    fn alpha_regime_uses_alpha_sigma() {
        let s = spec(
            ExperimentKind::AlphaRegime,
            vec![50],
            BetaRule::NbetaFixed(2.0),
            TestFunction::Monomial(2),
            50,
        );
        let r = &run_experiment(&s).unwrap().per_size[0];
        assert_eq!(r.exact_sigma, Some(8.0));
        assert!(r.quadrature_sigma.is_none());
    }

    #[test]
    fn semicircle_kind_reports_ks() {
        let s = spec(
            ExperimentKind::SemicircleLaw,
            vec![400],
            BetaRule::Fixed(1.0),
            TestFunction::Monomial(4),
            5,
        );
        let r = &run_experiment(&s).unwrap().per_size[0];
        assert!(r.semicircle_ks.unwrap() < 0.1);
    }

    #[test]
    fn budget_guard() {
        let mut s = spec(
            ExperimentKind::CltFixedBeta,
            vec![100_000],
            BetaRule::Fixed(1.0),
            TestFunction::Monomial(2),
            10,
        );
        assert!(matches!(run_experiment(&s), Err(Error::Budget { .. })));
        s.n_list = vec![10];
        s.max_ops = Some(10.0);
        assert!(matches!(run_experiment(&s), Err(Error::Budget { .. })));
    }

    #[test]
    fn samples_csv() {
        let s = spec(
            ExperimentKind::CltFixedBeta,
            vec![10],
            BetaRule::Fixed(1.0),
            TestFunction::Monomial(1),
            4,
        );
        let r = run_experiment(&s).unwrap();
        let mut buf = Vec::new();
        r.write_samples_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("n,beta,index,value\n"));
    }
}
