// SPDX-License-Identifier: MIT OR Apache-2.0

//! Piecewise-constant test signals and their noisy realizations.

use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Segment length of the default `extreme.teeth` signal.
pub const EXTREME_TEETH_SEGMENT_LEN: usize = 5;
/// Number of segments of the default `extreme.teeth` signal (199 change points).
pub const EXTREME_TEETH_SEGMENTS: usize = 200;

/// An observed real-valued sequence `X_1..X_T` with `T >= 2` finite values.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `X + c`
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|x| x + c).collect())
    }

    /// `alpha * X`
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|x| alpha * x).collect())
    }
}

/// The true mean underlying a series: a step function on `1..=T`.
///
/// Change points use the half-open convention of the rest of the crate: a
/// change point at `k` means observations `1..=k` and `k+1..` belong to
/// different segments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseSignal {
    length: usize,
    change_points: Vec<usize>,
    segment_means: Vec<f64>,
    name: Option<String>,
}

impl PiecewiseSignal {
    pub fn new(length: usize, change_points: Vec<usize>, segment_means: Vec<f64>) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidSignal("length must be positive".into()));
        }
        if segment_means.len() != change_points.len() + 1 {
            return Err(Error::InvalidSignal(format!(
                "expected {} segment means for {} change points, got {}",
                change_points.len() + 1,
                change_points.len(),
                segment_means.len()
            )));
        }
        if let Some(w) = change_points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSignal(format!(
                "change points not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&cp) = change_points.iter().find(|&&c| c == 0 || c >= length) {
            return Err(Error::InvalidSignal(format!(
                "change point {cp} outside [1, {}]",
                length - 1
            )));
        }
        if let Some(i) = segment_means.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "segment mean {i} is not finite"
            )));
        }
        if let Some(i) = segment_means.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::InvalidSignal(format!(
                "segments {i} and {} have equal means; change point {} is not a jump",
                i + 1,
                change_points[i]
            )));
        }
        Ok(Self {
            length,
            change_points,
            segment_means,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    pub fn segment_means(&self) -> &[f64] {
        &self.segment_means
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Mean of observation `t` (1-based, `1..=T`).
    pub fn mean_at(&self, t: usize) -> f64 {
        let seg = self.change_points.partition_point(|&c| c < t);
        self.segment_means[seg]
    }

    /// The noiseless signal as a dense vector.
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.length);
        let mut start = 0;
        for (i, &mean) in self.segment_means.iter().enumerate() {
            let end = self.change_points.get(i).copied().unwrap_or(self.length);
            out.extend(std::iter::repeat_n(mean, end - start));
            start = end;
        }
        out
    }

    pub fn min_segment_len(&self) -> usize {
        let mut bounds = Vec::with_capacity(self.change_points.len() + 2);
        bounds.push(0);
        bounds.extend_from_slice(&self.change_points);
        bounds.push(self.length);
        bounds
            .windows(2)
            .map(|w| w[1] - w[0])
            .min()
            .unwrap_or(self.length)
    }

    /// Smallest absolute jump, `None` for a constant signal.
    pub fn min_jump(&self) -> Option<f64> {
        self.segment_means
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .min_by(f64::total_cmp)
    }
}

/// Alternating `low, high, low, ...` blocks of `segment_len` observations.
pub fn make_teeth(
    segment_len: usize,
    num_segments: usize,
    low: f64,
    high: f64,
) -> Result<PiecewiseSignal> {
    if segment_len < 2 {
        return Err(Error::param("segment_len", "must be at least 2"));
    }
    if num_segments < 2 {
        return Err(Error::param("num_segments", "must be at least 2"));
    }
    let cpts = (1..num_segments).map(|i| i * segment_len).collect();
    let means = (0..num_segments)
        .map(|i| if i % 2 == 0 { low } else { high })
        .collect();
    PiecewiseSignal::new(segment_len * num_segments, cpts, means)
}

/// Monotone staircase `0, h, 2h, ...` with steps of `step_len` observations.
pub fn make_stairs(step_len: usize, num_steps: usize, step_height: f64) -> Result<PiecewiseSignal> {
    if step_len < 2 {
        return Err(Error::param("step_len", "must be at least 2"));
    }
    if num_steps < 2 {
        return Err(Error::param("num_steps", "must be at least 2"));
    }
    if step_height == 0.0 || !step_height.is_finite() {
        return Err(Error::param("step_height", "must be finite and non-zero"));
    }
    let cpts = (1..num_steps).map(|i| i * step_len).collect();
    let means = (0..num_steps).map(|i| i as f64 * step_height).collect();
    PiecewiseSignal::new(step_len * num_steps, cpts, means)
}

/// `extreme.teeth`: 200 blocks of 5 alternating between 0 and 1.
pub fn extreme_teeth() -> PiecewiseSignal {
    make_teeth(EXTREME_TEETH_SEGMENT_LEN, EXTREME_TEETH_SEGMENTS, 0.0, 1.0)
        .expect("default teeth parameters are valid")
        .with_name("extreme.teeth")
}

/// `stairs10`: 50 unit steps of length 10.
pub fn stairs10() -> PiecewiseSignal {
    make_stairs(10, 50, 1.0)
        .expect("default stairs parameters are valid")
        .with_name("stairs10")
}

/// Looks up a built-in signal by name.
pub fn named_signal(name: &str) -> Option<PiecewiseSignal> {
    match name {
        "extreme.teeth" | "extreme_teeth" => Some(extreme_teeth()),
        "stairs10" => Some(stairs10()),
        _ => None,
    }
}

/// On-disk signal description:
/// `{"T": int, "change_points": [int...], "means": [float...], "name": string}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(rename = "T")]
    pub length: usize,
    pub change_points: Vec<usize>,
    pub means: Vec<f64>,
    #[serde(default)]
    pub name: Option<String>,
}

impl SignalSpec {
    pub fn into_signal(self) -> Result<PiecewiseSignal> {
        let signal = PiecewiseSignal::new(self.length, self.change_points, self.means)?;
        Ok(match self.name {
            Some(name) => signal.with_name(name),
            None => signal,
        })
    }
}

impl From<&PiecewiseSignal> for SignalSpec {
    fn from(s: &PiecewiseSignal) -> Self {
        SignalSpec {
            length: s.length,
            change_points: s.change_points.clone(),
            means: s.segment_means.clone(),
            name: s.name.clone(),
        }
    }
}

pub fn parse_signal_spec(json: &str) -> Result<PiecewiseSignal> {
    let spec: SignalSpec =
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("signal spec: {e}")))?;
    spec.into_signal()
}

pub fn load_signal_spec(path: impl AsRef<Path>) -> Result<PiecewiseSignal> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_signal_spec(&text)
}

/// `X_t = mu_t + sigma * Z_t` with `Z_t` drawn from [`crate::rng::seeded_rng`].
pub fn sample_noisy(signal: &PiecewiseSignal, sigma: f64, seed: u64) -> Result<TimeSeries> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", "must be finite and non-negative"));
    }
    let mut values = signal.values();
    if sigma > 0.0 {
        let mut rng = seeded_rng(seed);
        for v in values.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * z;
        }
    }
    TimeSeries::new(values)
}
