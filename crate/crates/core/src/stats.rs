// SPDX-License-Identifier: MIT OR Apache-2.0

//! Small order-statistics helpers shared by the estimators and the harness.

/// Lower median: element of rank `(n - 1) / 2` in sorted order.
pub(crate) fn lower_median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mid = (values.len() - 1) / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

/// Sample quantile with linear interpolation between order statistics
/// (the "type 7" definition used by R and NumPy).
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
