// SPDX-License-Identifier: MIT OR Apache-2.0

//! Candidate intervals for CUSUM evaluation.
//!
//! Intervals are half-open and 0-based: `(s, e]` covers observations
//! `s+1..=e`. The seeded construction is layered. Layer `k` (starting at 1)
//! holds `n_k = 2 * ceil(decay^(k-1)) - 1` intervals of common length
//! `l_k = ceil(T * decay^-(k-1))`, placed evenly with starts
//! `round(i * (T - l_k) / (n_k - 1))`; layer 1 is the full range. Layers stop
//! once `l_k < min_len`.

use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// `(start, end]` with `end - start >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if end < start + 2 {
            return Err(Error::param(
                "interval",
                format!("({start}, {end}] holds fewer than two observations"),
            ));
        }
        Ok(Self { start, end })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Whether `other` lies inside `self`.
    #[inline]
    pub fn contains(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Whether 1-based observation `t` lies in `(start, end]`.
    #[inline]
    pub fn covers(&self, t: usize) -> bool {
        self.start < t && t <= self.end
    }

    pub(crate) fn shifted(self, offset: usize) -> Self {
        Self {
            start: self.start + offset,
            end: self.end + offset,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    Seeded,
    Random,
    Augmented,
}

/// How an [`IntervalSet`] was generated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalMeta {
    pub kind: IntervalKind,
    pub series_len: usize,
    pub decay: Option<f64>,
    pub min_len: Option<usize>,
    pub augment_max_len: Option<usize>,
    /// Number of random draws.
    pub draws: Option<usize>,
    pub seed: Option<u64>,
}

impl IntervalMeta {
    fn new(kind: IntervalKind, series_len: usize) -> Self {
        Self {
            kind,
            series_len,
            decay: None,
            min_len: None,
            augment_max_len: None,
            draws: None,
            seed: None,
        }
    }
}

/// Ordered, duplicate-free collection of intervals inside `(0, T]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
    meta: IntervalMeta,
}

impl IntervalSet {
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn meta(&self) -> &IntervalMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Sum of interval lengths: the number of observations touched when every
    /// interval is scanned once.
    pub fn total_length(&self) -> usize {
        self.intervals.iter().map(Interval::len).sum()
    }

    /// Builds a set from arbitrary intervals, dropping duplicates (first
    /// occurrence wins) and rejecting anything outside `(0, series_len]`.
    pub fn from_intervals(
        series_len: usize,
        intervals: impl IntoIterator<Item = Interval>,
        meta: Option<IntervalMeta>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for iv in intervals {
            if iv.end > series_len || iv.len() < 2 {
                return Err(Error::param(
                    "intervals",
                    format!("({}, {}] invalid for T = {series_len}", iv.start, iv.end),
                ));
            }
            if seen.insert(iv) {
                out.push(iv);
            }
        }
        let meta = meta.unwrap_or_else(|| IntervalMeta::new(IntervalKind::Augmented, series_len));
        Ok(Self {
            intervals: out,
            meta,
        })
    }

    /// Every interval of `(0, T]` with at least two observations.
    pub fn exhaustive(series_len: usize) -> Self {
        let intervals = (0..series_len)
            .flat_map(|s| (s + 2..=series_len).map(move |e| Interval { start: s, end: e }))
            .collect();
        let mut meta = IntervalMeta::new(IntervalKind::Augmented, series_len);
        meta.augment_max_len = Some(series_len + 1);
        Self { intervals, meta }
    }
}

/// `ceil` that ignores representation error of a few ulps above an integer,
/// so that e.g. `sqrt(2)^2 = 2.0000000000000004` rounds to 2.
fn tolerant_ceil(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

fn check_decay(decay: f64) -> Result<()> {
    if !(decay > 1.0 && decay <= 2.0) {
        return Err(Error::param("decay", format!("{decay} is outside (1, 2]")));
    }
    Ok(())
}

/// Layer-by-layer seeded intervals, before de-duplication across layers.
pub fn seeded_layers(series_len: usize, decay: f64, min_len: usize) -> Result<Vec<Vec<Interval>>> {
    check_decay(decay)?;
    if min_len < 2 {
        return Err(Error::param("min_len", "must be at least 2"));
    }
    if series_len < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: series_len,
        });
    }
    let mut layers = Vec::new();
    for k in 0.. {
        let scale = decay.powi(k);
        let len = tolerant_ceil(series_len as f64 / scale).min(series_len);
        if len < min_len || len < 2 {
            break;
        }
        let count = 2 * tolerant_ceil(scale) - 1;
        let slack = series_len - len;
        let layer = if count == 1 {
            vec![Interval { start: 0, end: len }]
        } else {
            let denom = count - 1;
            // round-half-up of i * slack / denom in exact integer arithmetic
            (0..count)
                .map(|i| {
                    let start = (2 * i * slack + denom) / (2 * denom);
                    Interval {
                        start,
                        end: start + len,
                    }
                })
                .collect()
        };
        layers.push(layer);
    }
    Ok(layers)
}

/// Deterministic seeded intervals, ordered by (layer, start), de-duplicated.
pub fn seeded_intervals(series_len: usize, decay: f64, min_len: usize) -> Result<IntervalSet> {
    let layers = seeded_layers(series_len, decay, min_len)?;
    let mut meta = IntervalMeta::new(IntervalKind::Seeded, series_len);
    meta.decay = Some(decay);
    meta.min_len = Some(min_len);
    IntervalSet::from_intervals(series_len, layers.into_iter().flatten(), Some(meta))
}

/// Adds every interval shorter than `max_len` (and at least 2 long).
pub fn augment_small_intervals(
    set: &IntervalSet,
    series_len: usize,
    max_len: usize,
) -> Result<IntervalSet> {
    if max_len < 2 {
        return Err(Error::param("max_len", "must be at least 2"));
    }
    let small = (2..max_len.min(series_len + 1)).flat_map(|len| {
        (0..=series_len - len).map(move |s| Interval {
            start: s,
            end: s + len,
        })
    });
    let mut meta = set.meta.clone();
    meta.kind = IntervalKind::Augmented;
    meta.series_len = series_len;
    meta.augment_max_len = Some(max_len);
    IntervalSet::from_intervals(
        series_len,
        set.intervals.iter().copied().chain(small),
        Some(meta),
    )
}

/// `draws` intervals drawn uniformly from all `(s, e]` with `e - s >= 2`.
///
/// Endpoints are two distinct values of `0..=T`, rejected when adjacent.
/// Duplicated draws are stored once.
pub fn random_intervals(series_len: usize, draws: usize, seed: u64) -> Result<IntervalSet> {
    if series_len < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: series_len,
        });
    }
    if draws == 0 {
        return Err(Error::param("draws", "must be positive"));
    }
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(draws);
    while out.len() < draws {
        let a = rng.random_range(0..=series_len);
        let b = rng.random_range(0..=series_len);
        let (s, e) = if a < b { (a, b) } else { (b, a) };
        if e >= s + 2 {
            out.push(Interval { start: s, end: e });
        }
    }
    let mut meta = IntervalMeta::new(IntervalKind::Random, series_len);
    meta.draws = Some(draws);
    meta.seed = Some(seed);
    IntervalSet::from_intervals(series_len, out, Some(meta))
}
