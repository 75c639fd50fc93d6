// SPDX-License-Identifier: MIT OR Apache-2.0

//! Noise level estimators for the change-in-mean model.
//!
//! Lag-`j` differences `(X_{t+j} - X_t) / sqrt(2)` have variance `sigma^2`
//! plus a jump term that grows linearly in `j` as long as every segment holds
//! at least `j` observations (each jump shows up in exactly `j` of them).
//! Combining two lags so that the jump term cancels gives the jump filtered
//! noise level (JFNL) estimator:
//!
//! ```text
//! sigma^2 = max(0, (j2 * v_{j1} - j1 * v_{j2}) / (j2 - j1))
//! ```
//!
//! which for `(j1, j2) = (1, 2)` is `max(0, 2 v_1 - v_2)`.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::signals::TimeSeries;
use crate::stats::lower_median;

/// Gaussian consistency constant for the median absolute deviation.
pub const MAD_CONSISTENCY: f64 = 1.4826;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMethod {
    Jfnl,
    JfnlTilde,
    JfnlLag,
    Mad,
    Ensemble,
}

impl NoiseMethod {
    pub fn name(self) -> &'static str {
        match self {
            NoiseMethod::Jfnl => "jfnl",
            NoiseMethod::JfnlTilde => "jfnl_tilde",
            NoiseMethod::JfnlLag => "jfnl_lag",
            NoiseMethod::Mad => "mad",
            NoiseMethod::Ensemble => "ensemble",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseEstimate {
    pub sigma2: f64,
    pub sigma: f64,
    pub method: NoiseMethod,
    pub lags: Option<(usize, usize)>,
}

impl NoiseEstimate {
    fn new(sigma2: f64, method: NoiseMethod, lags: Option<(usize, usize)>) -> Self {
        let sigma2 = sigma2.max(0.0);
        Self {
            sigma2,
            sigma: sigma2.sqrt(),
            method,
            lags,
        }
    }
}

/// Mean squared deviation with divisor `l`; uncentered (`sum Y^2 / l`) when
/// `centered` is false.
pub fn empirical_variance(y: &[f64], centered: bool) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::param("y", "empty vector"));
    }
    let l = y.len() as f64;
    let center = if centered {
        y.iter().sum::<f64>() / l
    } else {
        0.0
    };
    Ok(y.iter().map(|v| (v - center).powi(2)).sum::<f64>() / l)
}

fn scaled_differences(x: &[f64], lag: usize) -> Vec<f64> {
    x.iter()
        .zip(&x[lag..])
        .map(|(a, b)| (b - a) / SQRT_2)
        .collect()
}

fn lag_variance(x: &[f64], lag: usize, centered: bool) -> f64 {
    empirical_variance(&scaled_differences(x, lag), centered).expect("caller guarantees T > lag")
}

/// Two-lag jump filtered estimator.
///
/// Valid when every true segment holds at least `j2` observations; that
/// cannot be checked from data and is the caller's responsibility.
pub fn jfnl_lag(
    series: &TimeSeries,
    j1: usize,
    j2: usize,
    centered: bool,
) -> Result<NoiseEstimate> {
    if j1 == 0 || j1 >= j2 {
        return Err(Error::param(
            "lags",
            format!("need 1 <= j1 < j2, got ({j1}, {j2})"),
        ));
    }
    if series.len() <= j2 {
        return Err(Error::SeriesTooShort {
            needed: j2 + 1,
            got: series.len(),
        });
    }
    let x = series.values();
    let v1 = lag_variance(x, j1, centered);
    let v2 = lag_variance(x, j2, centered);
    let inner = (j2 as f64 * v1 - j1 as f64 * v2) / (j2 - j1) as f64;
    let method = match (j1, j2, centered) {
        (1, 2, true) => NoiseMethod::Jfnl,
        (1, 2, false) => NoiseMethod::JfnlTilde,
        _ => NoiseMethod::JfnlLag,
    };
    Ok(NoiseEstimate::new(inner, method, Some((j1, j2))))
}

/// `max(0, 2 v(lag-1 diffs) - v(lag-2 diffs))`.
pub fn jfnl(series: &TimeSeries) -> Result<NoiseEstimate> {
    jfnl_lag(series, 1, 2, true)
}

/// JFNL with the uncentered mean square in place of the variance.
pub fn jfnl_tilde(series: &TimeSeries) -> Result<NoiseEstimate> {
    jfnl_lag(series, 1, 2, false)
}

/// Value of the JFNL expression before clipping at zero.
pub fn jfnl_inner(series: &TimeSeries) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::SeriesTooShort {
            needed: 3,
            got: series.len(),
        });
    }
    let x = series.values();
    Ok(2.0 * lag_variance(x, 1, true) - lag_variance(x, 2, true))
}

/// `1.4826 * median(|D - median(D)|)` of `D_t = (X_{t+1} - X_t) / sqrt(2)`,
/// using the lower median for even counts.
pub fn mad_sigma(series: &TimeSeries) -> Result<NoiseEstimate> {
    let mut d = scaled_differences(series.values(), 1);
    let center = lower_median(&mut d);
    let mut dev: Vec<f64> = d.iter().map(|v| (v - center).abs()).collect();
    let sigma = MAD_CONSISTENCY * lower_median(&mut dev);
    Ok(NoiseEstimate::new(sigma * sigma, NoiseMethod::Mad, None))
}

/// Lower median of the `sigma2` values.
pub fn ensemble_sigma(estimates: &[NoiseEstimate]) -> Result<NoiseEstimate> {
    if estimates.is_empty() {
        return Err(Error::param("estimates", "empty list"));
    }
    let mut s2: Vec<f64> = estimates.iter().map(|e| e.sigma2).collect();
    Ok(NoiseEstimate::new(
        lower_median(&mut s2),
        NoiseMethod::Ensemble,
        None,
    ))
}

/// JFNL, JFNL-tilde and MAD combined via [`ensemble_sigma`].
pub fn default_ensemble(series: &TimeSeries) -> Result<NoiseEstimate> {
    ensemble_sigma(&[jfnl(series)?, jfnl_tilde(series)?, mad_sigma(series)?])
}
