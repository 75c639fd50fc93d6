// SPDX-License-Identifier: MIT OR Apache-2.0

//! CUSUM contrasts for the Gaussian change-in-mean model.
//!
//! For a split `b` of `(s, e]` with `n = e - s`, the statistic is
//!
//! ```text
//! | sqrt((e-b) / (n (b-s))) * S(s,b) - sqrt((b-s) / (n (e-b))) * S(b,e) |
//! ```
//!
//! where `S(i, j)` is the sum of observations `i+1..=j`. It is evaluated as
//! `sqrt((b-s)(e-b)/n) * |mean(s,b) - mean(b,e)|`, which is algebraically
//! identical and exactly zero on constant stretches.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intervals::Interval;

/// Cumulative sums `c[0] = 0`, `c[t] = X_1 + ... + X_t`.
///
/// Built with Neumaier-compensated summation so that long series keep the
/// per-split error at the level of a single rounding.
#[derive(Clone, Debug)]
pub struct PrefixSums {
    cumulative: Vec<f64>,
}

impl PrefixSums {
    pub fn new(values: &[f64]) -> Self {
        let mut cumulative = Vec::with_capacity(values.len() + 1);
        cumulative.push(0.0);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for &x in values {
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            cumulative.push(sum + comp);
        }
        Self { cumulative }
    }

    /// Number of observations `T`.
    pub fn len(&self) -> usize {
        self.cumulative.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// `X_{i+1} + ... + X_j`
    #[inline]
    pub fn sum(&self, i: usize, j: usize) -> f64 {
        self.cumulative[j] - self.cumulative[i]
    }

    #[inline]
    pub(crate) fn contrast(&self, s: usize, e: usize, b: usize) -> f64 {
        let nl = (b - s) as f64;
        let nr = (e - b) as f64;
        let diff = self.sum(s, b) / nl - self.sum(b, e) / nr;
        (nl * nr / (e - s) as f64).sqrt() * diff.abs()
    }
}

/// CUSUM of `(s, e]` split after observation `b`.
pub fn cusum_at(ps: &PrefixSums, s: usize, e: usize, b: usize) -> Result<f64> {
    if e > ps.len() {
        return Err(Error::param("e", format!("{e} exceeds T = {}", ps.len())));
    }
    if !(s < b && b < e) {
        return Err(Error::param("b", format!("{b} not inside ({s}, {e})")));
    }
    Ok(ps.contrast(s, e, b))
}

/// Maximal absolute CUSUM over an interval and where it is attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CusumResult {
    pub interval: Interval,
    pub best_split: usize,
    pub value: f64,
}

impl CusumResult {
    /// Total order used for every "best candidate" decision: larger value,
    /// then shorter interval, then smaller start, then smaller split.
    /// `Less` means `self` ranks ahead of `other`.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then(self.interval.len().cmp(&other.interval.len()))
            .then(self.interval.start.cmp(&other.interval.start))
            .then(self.best_split.cmp(&other.best_split))
    }
}

/// Maximizes the CUSUM over all splits of `interval`; ties go to the
/// smallest split.
pub fn max_cusum(ps: &PrefixSums, interval: Interval) -> CusumResult {
    debug_assert!(interval.end <= ps.len() && interval.len() >= 2);
    let Interval { start: s, end: e } = interval;
    let mut best_split = s + 1;
    let mut best = ps.contrast(s, e, s + 1);
    for b in s + 2..e {
        let v = ps.contrast(s, e, b);
        if v > best {
            best = v;
            best_split = b;
        }
    }
    CusumResult {
        interval,
        best_split,
        value: best,
    }
}

/// Evaluates [`max_cusum`] on each interval, in input order. Runs on the
/// current rayon pool when the `parallel` feature is enabled; the output does
/// not depend on the number of workers.
pub fn evaluate_all(ps: &PrefixSums, intervals: &[Interval]) -> Vec<CusumResult> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        // small workloads are not worth the fork/join overhead
        if intervals.len() >= 4096 {
            return intervals.par_iter().map(|&iv| max_cusum(ps, iv)).collect();
        }
    }
    intervals.iter().map(|&iv| max_cusum(ps, iv)).collect()
}
