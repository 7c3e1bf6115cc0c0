//! Checks of the two martingale CLT conditions along a list of sizes.
//!
//! Condition (i): `n^2 beta Var[<L_n, p>] -> sigma_p^2`, evaluated exactly.
//! Condition (ii) is probed through the fourth-moment bound
//! `E[Delta_k(xi_w)^4] <= C / (n beta)^2`: the quantity `(n beta)^2 E[Delta_k^4]` is
//! estimated by Monte Carlo at `k = n / 2` for every path shape of length `<= deg p`
//! and must stay bounded as `n` grows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::stream_id;
use super::spec::BetaRule;
use crate::error::{Error, Result};
use crate::exact::{rational_to_f64, sigma_p_sq, variance_at, Polynomial};
use crate::model::build_gbe;
use crate::paths::{enumerate_closed, exponent_profile, ClosedPath};
use crate::randsrc::RngStream;

/// Largest polynomial degree accepted by [`martingale_condition_scan`].
pub const SCAN_MAX_DEGREE: usize = 4;

/// A path shape placed so that its level `level` sits at site `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub path: String,
    pub level: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourthMoment {
    pub placement: Placement,
    /// Monte Carlo `E[Delta_k^4]`.
    pub fourth_moment: f64,
    /// `(n beta)^2 E[Delta_k^4]`.
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub beta: f64,
    /// Exact `n^2 beta Var[<L_n, p>]`.
    pub scaled_variance: f64,
    pub sigma_p_sq: f64,
    pub distance: f64,
    pub fourth_moments: Vec<FourthMoment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub polynomial: String,
    pub rows: Vec<ScanRow>,
    /// `max_n scaled(n) / scaled(n_first)` over all placements, 0 if there are none.
    pub trend_ratio: f64,
}

impl ScanReport {
    /// Whether every placement's scaled fourth moment stays within `factor` of its
    /// value at the first size.
    pub fn bounded_within(&self, factor: f64) -> bool {
        self.trend_ratio <= factor
    }
}

/// Every path of length `1..=m` together with each level carrying a nonzero exponent,
/// i.e. each way it can have a non-vanishing increment at a fixed site.
fn placements(m: usize) -> Result<Vec<(ClosedPath, i32)>> {
    let mut out = Vec::new();
    for r in 1..=m {
        for w in enumerate_closed(r)? {
            let prof = exponent_profile(&w);
            for (level, _, _) in prof.entries() {
                out.push((w.clone(), level));
            }
        }
    }
    Ok(out)
}

pub fn martingale_condition_scan(
    p: &Polynomial,
    n_list: &[usize],
    beta_rule: BetaRule,
    reps: usize,
    seed: u64,
) -> Result<ScanReport> {
    let m = p.degree();
    if m > SCAN_MAX_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "scan supports degree <= {SCAN_MAX_DEGREE}, got {m}"
        )));
    }
    if n_list.is_empty() || reps < 2 {
        return Err(Error::InvalidParameter("need a nonempty size list and reps >= 2".into()));
    }
    let sigma = rational_to_f64(&sigma_p_sq(p)?);
    let shapes = placements(m)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for (idx, &n) in n_list.iter().enumerate() {
        let beta = beta_rule.beta(n);
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {beta} at n = {n}")));
        }
        let nf = n as f64;
        let scaled_variance = variance_at(p, n, beta)? * nf * nf * beta;
        let k = (n / 2).max(1);

        let per_rep: Vec<Result<Vec<f64>>> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut s = RngStream::new(seed, stream_id(idx, rep));
                let t = build_gbe(n, beta, &mut s)?;
                shapes
                    .iter()
                    .map(|(w, level)| {
                        let d = crate::exact::martingale_delta(w, k as i64 - *level as i64, k, &t)?;
                        Ok(d.powi(4))
                    })
                    .collect()
            })
            .collect();
        let mut sums = vec![0.0; shapes.len()];
        for r in per_rep {
            for (acc, v) in sums.iter_mut().zip(r?) {
                *acc += v;
            }
        }
        let nb2 = (nf * beta).powi(2);
        let fourth_moments = shapes
            .iter()
            .zip(&sums)
            .map(|((w, level), s)| {
                let e4 = s / reps as f64;
                FourthMoment {
                    placement: Placement {
                        path: w.to_string(),
                        level: *level,
                    },
                    fourth_moment: e4,
                    scaled: nb2 * e4,
                }
            })
            .collect();
        rows.push(ScanRow {
            n,
            beta,
            scaled_variance,
            sigma_p_sq: sigma,
            distance: (scaled_variance - sigma).abs(),
            fourth_moments,
        });
    }
    let mut trend_ratio = 0.0f64;
    for (i, _) in shapes.iter().enumerate() {
        let base = rows[0].fourth_moments[i].scaled;
        if base > 0.0 {
            for row in &rows {
                trend_ratio = trend_ratio.max(row.fourth_moments[i].scaled / base);
            }
        }
    }
    Ok(ScanReport {
        polynomial: p.to_string(),
        rows,
        trend_ratio,
    })
}
