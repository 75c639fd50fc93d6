// SPDX-License-Identifier: MIT OR Apache-2.0

//! Choosing a final model from a solution path.
//!
//! Candidate models are the prefixes of a [`SolutionPath`] (each is
//! parent-closed). Two BIC conventions are supported:
//!
//! * unknown variance: `T/2 * ln(mse_k) + k * penalty`, default penalty `ln T`;
//! * known variance: `rss_k + k * beta`, `beta = beta_factor * sigma^2 * ln T`.
//!
//! A prefix that fits the data exactly (`mse_k = 0`) with every segment
//! holding at least two observations is selected outright under the
//! unknown-variance criterion, where `ln 0` is undefined. Prefixes whose zero
//! residual comes from singleton segments are saturated, not exact, and are
//! skipped.
//!
//! The unknown-variance search is restricted to `k <= max_cpts`, by default
//! `floor(T/2) - 1`, the largest model in which every segment can hold two
//! observations. Without a cap `ln(mse_k)` diverges as the path approaches
//! saturation and the criterion always prefers near-saturated prefixes.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::segmentation::{ChangePointSet, SolutionPath};
use crate::signals::TimeSeries;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseFit {
    pub change_points: ChangePointSet,
    pub means: Vec<f64>,
    pub rss: f64,
    pub mse: f64,
    /// Minimized criterion value when the fit came from a BIC search.
    pub criterion: Option<f64>,
}

/// Mean and residual sum of squares; exactly `(x[0], 0)` on a constant run.
fn segment_stats(x: &[f64]) -> (f64, f64) {
    if x.iter().all(|&v| v == x[0]) {
        return (x[0], 0.0);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let rss = x.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, rss)
}

/// Least-squares piecewise-constant fit with the given change points.
pub fn fit_means(series: &TimeSeries, cpts: &ChangePointSet) -> Result<PiecewiseFit> {
    let t = series.len();
    if let Some(&p) = cpts.positions().iter().find(|&&p| p == 0 || p >= t) {
        return Err(Error::param(
            "change_points",
            format!("{p} outside [1, {}]", t - 1),
        ));
    }
    let x = series.values();
    let mut means = Vec::with_capacity(cpts.len() + 1);
    let mut rss = 0.0;
    let mut start = 0;
    for end in cpts.positions().iter().copied().chain(std::iter::once(t)) {
        let (m, r) = segment_stats(&x[start..end]);
        means.push(m);
        rss += r;
        start = end;
    }
    Ok(PiecewiseFit {
        change_points: cpts.clone(),
        means,
        rss,
        mse: rss / t as f64,
        criterion: None,
    })
}

/// `C * sigma_hat * sqrt(2 ln T)`.
pub fn universal_threshold(sigma_hat: f64, series_len: f64, c: f64) -> f64 {
    c * sigma_hat * (2.0 * series_len.ln()).sqrt()
}

/// Default per-change-point penalty of the unknown-variance criterion.
pub fn default_bic_penalty(series_len: usize) -> f64 {
    (series_len as f64).ln()
}

pub const DEFAULT_BETA_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug)]
struct PrefixStats {
    /// Exactly zero iff every segment is constant.
    rss: f64,
    singletons: usize,
}

/// Residuals for every prefix `k = 0..=|path|`.
fn prefix_rss(path: &SolutionPath, series: &TimeSeries) -> Result<Vec<PrefixStats>> {
    let t = series.len();
    if path.series_len() != t {
        return Err(Error::param(
            "path",
            format!("built for T = {}, series has T = {t}", path.series_len()),
        ));
    }
    let x = series.values();
    let seg_rss = |a: usize, b: usize| segment_stats(&x[a..b]).1;

    let mut segments: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    let root = seg_rss(0, t);
    segments.insert(0, (t, root));
    let mut total = root;
    let mut nonzero = usize::from(root != 0.0);
    let mut singletons = 0usize;
    let mut out = Vec::with_capacity(path.len() + 1);
    out.push(PrefixStats {
        rss: if nonzero == 0 { 0.0 } else { total },
        singletons,
    });

    for node in path.nodes() {
        let b = node.split();
        let (&a, &(c, r)) = segments
            .range(..b)
            .next_back()
            .expect("root segment always present");
        debug_assert!(a < b && b < c);
        let (rl, rr) = (seg_rss(a, b), seg_rss(b, c));
        total += rl + rr - r;
        nonzero = nonzero + usize::from(rl != 0.0) + usize::from(rr != 0.0) - usize::from(r != 0.0);
        singletons += usize::from(b - a == 1) + usize::from(c - b == 1);
        segments.insert(a, (b, rl));
        segments.insert(b, (c, rr));
        out.push(PrefixStats {
            rss: if nonzero == 0 { 0.0 } else { total.max(0.0) },
            singletons,
        });
    }
    Ok(out)
}

fn select(
    path: &SolutionPath,
    series: &TimeSeries,
    k: usize,
    criterion: f64,
) -> Result<PiecewiseFit> {
    let mut fit = fit_means(series, &path.prefix(k))?;
    fit.criterion = Some(criterion);
    Ok(fit)
}

/// Default model-size cap of the unknown-variance criterion.
pub fn default_max_cpts(series_len: usize) -> usize {
    (series_len / 2).saturating_sub(1)
}

/// Minimizes `T/2 * ln(rss_k / T) + k * penalty_per_cpt` over path prefixes
/// with `k <= default_max_cpts(T)`.
pub fn bic_unknown_variance(
    path: &SolutionPath,
    series: &TimeSeries,
    penalty_per_cpt: f64,
) -> Result<PiecewiseFit> {
    bic_unknown_variance_capped(
        path,
        series,
        penalty_per_cpt,
        default_max_cpts(series.len()),
    )
}

/// [`bic_unknown_variance`] over prefixes `k <= max_cpts`.
pub fn bic_unknown_variance_capped(
    path: &SolutionPath,
    series: &TimeSeries,
    penalty_per_cpt: f64,
    max_cpts: usize,
) -> Result<PiecewiseFit> {
    if penalty_per_cpt.is_nan() || penalty_per_cpt <= 0.0 {
        return Err(Error::param("penalty_per_cpt", "must be positive"));
    }
    let rss = prefix_rss(path, series)?;
    let t = series.len() as f64;
    let mut best = (0, f64::INFINITY);
    for (k, p) in rss.iter().enumerate().take(max_cpts + 1) {
        if p.rss == 0.0 {
            if p.singletons == 0 {
                return select(path, series, k, f64::NEG_INFINITY);
            }
            continue;
        }
        let crit = 0.5 * t * (p.rss / t).ln() + k as f64 * penalty_per_cpt;
        if crit < best.1 {
            best = (k, crit);
        }
    }
    select(path, series, best.0, best.1)
}

/// Minimizes `rss_k + k * beta_factor * sigma2 * ln T` over path prefixes.
pub fn bic_known_variance(
    path: &SolutionPath,
    series: &TimeSeries,
    sigma2: f64,
    beta_factor: f64,
) -> Result<PiecewiseFit> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::param("sigma2", "must be positive and finite"));
    }
    if beta_factor.is_nan() || beta_factor <= 0.0 {
        return Err(Error::param("beta_factor", "must be positive"));
    }
    let beta = beta_factor * sigma2 * (series.len() as f64).ln();
    let rss = prefix_rss(path, series)?;
    let mut best = (0, f64::INFINITY);
    for (k, p) in rss.iter().enumerate() {
        let crit = p.rss + k as f64 * beta;
        if crit < best.1 {
            best = (k, crit);
        }
    }
    select(path, series, best.0, best.1)
}
