// SPDX-License-Identifier: MIT OR Apache-2.0

//! Browser bindings for the `seedbs` demo page.
//!
//! Each export takes plain numbers and strings and returns a JSON string.
//! The same functions are available natively (without the `wasm_` prefix)
//! so they can be tested off the browser.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use seedbs::harness::{all_noise_estimates, detect_change_points, DetectionConfig};
use seedbs::intervals::seeded_layers;
use seedbs::signals::{make_stairs, make_teeth, sample_noisy, PiecewiseSignal};
use seedbs::{fit_means, TimeSeries};

pub type Result<T> = std::result::Result<T, String>;

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Serialize)]
struct SignalOut {
    truth: Vec<f64>,
    values: Vec<f64>,
    change_points: Vec<usize>,
}

/// `kind` is `teeth` (alternating 0/1) or `stairs` (unit steps).
pub fn generate(
    kind: &str,
    segment_len: usize,
    segments: usize,
    sigma: f64,
    seed: u64,
) -> Result<String> {
    let signal: PiecewiseSignal = match kind {
        "teeth" => make_teeth(segment_len, segments, 0.0, 1.0),
        "stairs" => make_stairs(segment_len, segments, 1.0),
        other => return Err(format!("unknown signal kind `{other}`")),
    }
    .map_err(fail)?;
    let values = sample_noisy(&signal, sigma, seed)
        .map_err(fail)?
        .into_inner();
    serde_json::to_string(&SignalOut {
        truth: signal.values(),
        values,
        change_points: signal.change_points().to_vec(),
    })
    .map_err(fail)
}

#[derive(Serialize)]
struct DetectOut {
    change_points: Vec<usize>,
    fitted: Vec<f64>,
    sigma_hat: f64,
    threshold_or_criterion: Option<f64>,
    label: String,
}

/// Runs a detector; `m` and `seed` are only used for `selection = wbs`.
#[allow(clippy::too_many_arguments)]
pub fn detect(
    values: &[f64],
    selection: &str,
    noise_method: &str,
    model_sel: &str,
    c: f64,
    decay: f64,
    augment_below: usize,
    m: usize,
    seed: u64,
) -> Result<String> {
    let series = TimeSeries::new(values.to_vec()).map_err(fail)?;
    let selection = selection.parse().map_err(fail)?;
    let wbs = selection == seedbs::harness::Selection::Wbs;
    let config = DetectionConfig {
        decay,
        augment_below,
        selection,
        noise_method: noise_method.parse().map_err(fail)?,
        model_sel: model_sel.parse().map_err(fail)?,
        c,
        wbs_draws: wbs.then_some(m),
        seed: wbs.then_some(seed),
        ..DetectionConfig::default()
    };
    let d = detect_change_points(&series, &config).map_err(fail)?;
    let fit = fit_means(&series, &d.change_points).map_err(fail)?;
    let mut fitted = Vec::with_capacity(series.len());
    let bounds = d
        .change_points
        .positions()
        .iter()
        .copied()
        .chain([series.len()]);
    let mut start = 0;
    for (end, mean) in bounds.zip(&fit.means) {
        fitted.extend(std::iter::repeat_n(*mean, end - start));
        start = end;
    }
    serde_json::to_string(&DetectOut {
        change_points: d.change_points.positions().to_vec(),
        fitted,
        sigma_hat: d.noise.sigma,
        threshold_or_criterion: d.threshold_or_criterion,
        label: config.label(),
    })
    .map_err(fail)
}

pub fn noise(values: &[f64]) -> Result<String> {
    let series = TimeSeries::new(values.to_vec()).map_err(fail)?;
    serde_json::to_string(&all_noise_estimates(&series).map_err(fail)?).map_err(fail)
}

/// Seeded intervals per layer as `[[[start, end], ...], ...]`.
pub fn layers(series_len: usize, decay: f64, min_len: usize) -> Result<String> {
    let layers = seeded_layers(series_len, decay, min_len).map_err(fail)?;
    let out: Vec<Vec<[usize; 2]>> = layers
        .iter()
        .map(|l| l.iter().map(|i| [i.start, i.end]).collect())
        .collect();
    serde_json::to_string(&out).map_err(fail)
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = generateSignal)]
pub fn wasm_generate(
    kind: &str,
    segment_len: usize,
    segments: usize,
    sigma: f64,
    seed: u64,
) -> std::result::Result<String, JsError> {
    js(generate(kind, segment_len, segments, sigma, seed))
}

#[wasm_bindgen(js_name = detect)]
#[allow(clippy::too_many_arguments)]
pub fn wasm_detect(
    values: &[f64],
    selection: &str,
    noise_method: &str,
    model_sel: &str,
    c: f64,
    decay: f64,
    augment_below: usize,
    m: usize,
    seed: u64,
) -> std::result::Result<String, JsError> {
    js(detect(
        values,
        selection,
        noise_method,
        model_sel,
        c,
        decay,
        augment_below,
        m,
        seed,
    ))
}

#[wasm_bindgen(js_name = noiseEstimates)]
pub fn wasm_noise(values: &[f64]) -> std::result::Result<String, JsError> {
    js(noise(values))
}

#[wasm_bindgen(js_name = seededLayers)]
pub fn wasm_layers(
    series_len: usize,
    decay: f64,
    min_len: usize,
) -> std::result::Result<String, JsError> {
    js(layers(series_len, decay, min_len))
}
