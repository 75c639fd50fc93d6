// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end runs: single-series detection, Monte Carlo simulation and
//! interval-count/runtime benchmarks. All reports serialize with serde.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intervals::{augment_small_intervals, seeded_intervals, IntervalSet};
use crate::model_selection::{
    bic_known_variance, bic_unknown_variance, default_bic_penalty, universal_threshold,
    DEFAULT_BETA_FACTOR,
};
use crate::noise::{default_ensemble, jfnl, jfnl_lag, jfnl_tilde, mad_sigma, NoiseEstimate};
use crate::rng::derive_seed;
use crate::segmentation::{
    aseedbs, aseedbs_path, greedy_path, not_select, threshold_prune, wbs_path, ChangePointSet,
    SolutionPath,
};
use crate::signals::{sample_noisy, PiecewiseSignal, TimeSeries};
use crate::stats::quantile_sorted;

/// Default decay of seeded interval lengths between layers.
pub const DEFAULT_DECAY: f64 = std::f64::consts::SQRT_2;
/// Intervals shorter than this are all added on top of the seeded ones.
pub const DEFAULT_AUGMENT_BELOW: usize = 10;
/// Default number of random intervals for the WBS baseline in simulations.
pub const DEFAULT_WBS_DRAWS: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Greedy,
    Not,
    Aseedbs,
    Wbs,
}

impl FromStr for Selection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "greedy" | "seedbs" => Ok(Selection::Greedy),
            "not" => Ok(Selection::Not),
            "aseedbs" | "adaptive" => Ok(Selection::Aseedbs),
            "wbs" => Ok(Selection::Wbs),
            other => Err(Error::param(
                "selection",
                format!("unknown selection `{other}`"),
            )),
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selection::Greedy => "greedy",
            Selection::Not => "not",
            Selection::Aseedbs => "aseedbs",
            Selection::Wbs => "wbs",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseChoice {
    Jfnl,
    JfnlTilde,
    JfnlLag { j1: usize, j2: usize },
    Mad,
    Ensemble,
}

impl NoiseChoice {
    pub fn estimate(self, series: &TimeSeries) -> Result<NoiseEstimate> {
        match self {
            NoiseChoice::Jfnl => jfnl(series),
            NoiseChoice::JfnlTilde => jfnl_tilde(series),
            NoiseChoice::JfnlLag { j1, j2 } => jfnl_lag(series, j1, j2, true),
            NoiseChoice::Mad => mad_sigma(series),
            NoiseChoice::Ensemble => default_ensemble(series),
        }
    }
}

/// Accepts `jfnl`, `jfnl_tilde`, `jfnl_lag(J1,J2)` (also `jfnl_lag:J1:J2`),
/// `mad` and `ensemble`.
impl FromStr for NoiseChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "jfnl" => return Ok(NoiseChoice::Jfnl),
            "jfnl_tilde" | "jfnltilde" => return Ok(NoiseChoice::JfnlTilde),
            "mad" => return Ok(NoiseChoice::Mad),
            "ensemble" | "ens" => return Ok(NoiseChoice::Ensemble),
            _ => {}
        }
        let bad = || Error::param("noise_method", format!("unknown noise method `{s}`"));
        let rest = lower
            .strip_prefix("jfnl_lag")
            .or_else(|| lower.strip_prefix("lag"))
            .ok_or_else(bad)?;
        let nums: Vec<usize> = rest
            .split(|c: char| !c.is_ascii_digit())
            .filter(|p| !p.is_empty())
            .map(|p| p.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match nums.as_slice() {
            &[j1, j2] if j1 >= 1 && j1 < j2 => Ok(NoiseChoice::JfnlLag { j1, j2 }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for NoiseChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseChoice::Jfnl => f.write_str("jfnl"),
            NoiseChoice::JfnlTilde => f.write_str("jfnl_tilde"),
            NoiseChoice::JfnlLag { j1, j2 } => write!(f, "jfnl_lag({j1},{j2})"),
            NoiseChoice::Mad => f.write_str("mad"),
            NoiseChoice::Ensemble => f.write_str("ensemble"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSelection {
    Threshold,
    BicUnknown,
    BicKnown,
}

impl FromStr for ModelSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "threshold" | "thr" => Ok(ModelSelection::Threshold),
            "bic_unknown" | "bicu" => Ok(ModelSelection::BicUnknown),
            "bic_known" | "bick" => Ok(ModelSelection::BicKnown),
            other => Err(Error::param(
                "model_sel",
                format!("unknown model selection `{other}`"),
            )),
        }
    }
}

impl fmt::Display for ModelSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelSelection::Threshold => "threshold",
            ModelSelection::BicUnknown => "bic_unknown",
            ModelSelection::BicKnown => "bic_known",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionConfig {
    pub decay: f64,
    pub min_len: usize,
    /// 0 disables augmentation.
    pub augment_below: usize,
    pub selection: Selection,
    /// Number of random intervals; required for and only for `wbs`.
    #[serde(rename = "M")]
    pub wbs_draws: Option<usize>,
    pub seed: Option<u64>,
    pub noise_method: NoiseChoice,
    pub model_sel: ModelSelection,
    /// Multiplier of the universal threshold.
    #[serde(rename = "C")]
    pub c: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            decay: DEFAULT_DECAY,
            min_len: 2,
            augment_below: DEFAULT_AUGMENT_BELOW,
            selection: Selection::Greedy,
            wbs_draws: None,
            seed: None,
            noise_method: NoiseChoice::Jfnl,
            model_sel: ModelSelection::Threshold,
            c: 1.0,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 1.0 && self.decay <= 2.0) {
            return Err(Error::param("decay", "must lie in (1, 2]"));
        }
        if self.min_len < 2 {
            return Err(Error::param("min_len", "must be at least 2"));
        }
        if self.augment_below == 1 {
            return Err(Error::param(
                "augment_below",
                "use 0 to disable, or a value >= 2",
            ));
        }
        match (self.selection, self.wbs_draws) {
            (Selection::Wbs, None) => {
                return Err(Error::param("M", "required when selection = wbs"))
            }
            (Selection::Wbs, Some(0)) => return Err(Error::param("M", "must be positive")),
            (Selection::Wbs, Some(_)) => {}
            (_, Some(_)) => return Err(Error::param("M", "only valid with selection = wbs")),
            (_, None) => {}
        }
        if self.seed.is_some() && self.selection != Selection::Wbs {
            return Err(Error::param("seed", "only valid with selection = wbs"));
        }
        if self.selection == Selection::Not && self.model_sel != ModelSelection::Threshold {
            return Err(Error::param(
                "model_sel",
                "NOT selection produces no solution path; only `threshold` applies",
            ));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param("C", "must be positive"));
        }
        Ok(())
    }

    /// Short tag such as `greedy_threshold_jfnl`.
    pub fn label(&self) -> String {
        format!(
            "{}_{}_{}",
            self.selection, self.model_sel, self.noise_method
        )
    }

    /// Seeded intervals (optionally augmented) for the greedy and NOT rules.
    pub fn seeded_set(&self, series_len: usize) -> Result<IntervalSet> {
        let set = seeded_intervals(series_len, self.decay, self.min_len)?;
        if self.augment_below >= 2 {
            augment_small_intervals(&set, series_len, self.augment_below)
        } else {
            Ok(set)
        }
    }

    fn path(&self, series: &TimeSeries) -> Result<SolutionPath> {
        match self.selection {
            Selection::Greedy => greedy_path(series, &self.seeded_set(series.len())?),
            Selection::Aseedbs => aseedbs_path(series, self.decay, self.min_len),
            Selection::Wbs => wbs_path(
                series,
                self.wbs_draws.expect("validated"),
                self.seed.unwrap_or(0),
            ),
            Selection::Not => unreachable!("validated: NOT has no path"),
        }
    }
}

/// Outcome of [`detect_change_points`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Detection {
    pub change_points: ChangePointSet,
    pub noise: NoiseEstimate,
    /// Threshold used, or the minimized criterion for BIC selection
    /// (`None` when an exact fit short-circuited the criterion).
    pub threshold_or_criterion: Option<f64>,
}

/// Runs the configured detector. Deterministic in `(series, config)`.
///
/// A zero noise estimate gives threshold 0: rules that need a positive
/// threshold then keep every candidate with a strictly positive CUSUM.
pub fn detect_change_points(series: &TimeSeries, config: &DetectionConfig) -> Result<Detection> {
    config.validate()?;
    let noise = config.noise_method.estimate(series)?;
    let t = series.len();
    match config.model_sel {
        ModelSelection::Threshold => {
            let thr = universal_threshold(noise.sigma, t as f64, config.c);
            let positive = thr.max(f64::MIN_POSITIVE);
            let change_points = match config.selection {
                Selection::Greedy | Selection::Wbs => threshold_prune(&config.path(series)?, thr),
                Selection::Not => not_select(series, &config.seeded_set(t)?, positive)?,
                Selection::Aseedbs => aseedbs(series, config.decay, config.min_len, positive)?,
            };
            Ok(Detection {
                change_points,
                noise,
                threshold_or_criterion: Some(thr),
            })
        }
        ModelSelection::BicUnknown => {
            let path = config.path(series)?;
            let fit = bic_unknown_variance(&path, series, default_bic_penalty(t))?;
            Ok(Detection {
                change_points: fit.change_points,
                noise,
                threshold_or_criterion: fit.criterion.filter(|c| c.is_finite()),
            })
        }
        ModelSelection::BicKnown => {
            let path = config.path(series)?;
            let sigma2 = noise.sigma2.max(f64::MIN_POSITIVE);
            let fit = bic_known_variance(&path, series, sigma2, DEFAULT_BETA_FACTOR)?;
            Ok(Detection {
                change_points: fit.change_points,
                noise,
                threshold_or_criterion: fit.criterion,
            })
        }
    }
}

/// JSON report of the `detect` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionReport {
    pub n: usize,
    pub sigma_hat: f64,
    pub method: String,
    pub threshold_or_criterion: Option<f64>,
    pub change_points: Vec<usize>,
    pub runtime_ms: f64,
}

pub fn detect(series: &TimeSeries, config: &DetectionConfig) -> Result<DetectionReport> {
    let start = Instant::now();
    let d = detect_change_points(series, config)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(DetectionReport {
        n: series.len(),
        sigma_hat: d.noise.sigma,
        method: config.label(),
        threshold_or_criterion: d.threshold_or_criterion,
        change_points: d.change_points.positions().to_vec(),
        runtime_ms,
    })
}

/// All noise estimators on one series, in a fixed order.
pub fn all_noise_estimates(series: &TimeSeries) -> Result<Vec<NoiseEstimate>> {
    let mut out = vec![jfnl(series)?, jfnl_tilde(series)?];
    if series.len() > 4 {
        out.push(jfnl_lag(series, 2, 4, true)?);
    }
    out.push(mad_sigma(series)?);
    out.push(default_ensemble(series)?);
    Ok(out)
}

/// A named detector in a simulation.
///
/// Names follow `<selection>_<model>_<noise>`, e.g. `seedbs_thr_jfnl`,
/// `wbs_thr1.0_mad`, `aseedbs_bick_jfnl`, `seedbs_bicu_jfnl`,
/// `not_thr_lag2-4`. Selection is one of `seedbs`, `not`, `aseedbs`, `wbs`;
/// model is `thr[C]`, `bicu` or `bick`; noise is `jfnl`, `jfnltilde`, `mad`,
/// `ensemble` or `lagJ1-J2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimMethod {
    pub name: String,
    pub config: DetectionConfig,
}

impl SimMethod {
    pub fn parse(name: &str, wbs_draws: usize) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let parts: Vec<&str> = lower.split('_').collect();
        let bad = |why: &str| Error::param("method", format!("`{name}`: {why}"));
        if parts.len() != 3 {
            return Err(bad("expected <selection>_<model>_<noise>"));
        }
        let selection: Selection = parts[0].parse().map_err(|_| bad("unknown selection"))?;
        let (model_sel, c) = if let Some(rest) = parts[1].strip_prefix("thr") {
            let c = if rest.is_empty() {
                1.0
            } else {
                rest.parse::<f64>()
                    .map_err(|_| bad("bad threshold constant"))?
            };
            (ModelSelection::Threshold, c)
        } else {
            (
                parts[1]
                    .parse()
                    .map_err(|_| bad("unknown model selection"))?,
                1.0,
            )
        };
        let noise_method: NoiseChoice =
            parts[2].parse().map_err(|_| bad("unknown noise method"))?;
        let config = DetectionConfig {
            selection,
            model_sel,
            c,
            noise_method,
            wbs_draws: (selection == Selection::Wbs).then_some(wbs_draws),
            seed: (selection == Selection::Wbs).then_some(0),
            ..DetectionConfig::default()
        };
        config.validate()?;
        Ok(Self {
            name: lower,
            config,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationSpec {
    pub scenario: String,
    #[serde(skip)]
    pub signal: PiecewiseSignal,
    pub sigmas: Vec<f64>,
    pub reps: usize,
    pub methods: Vec<SimMethod>,
    pub base_seed: u64,
    /// 0 uses the ambient rayon pool.
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationRow {
    pub replication: usize,
    pub method: String,
    pub sigma_true: f64,
    pub sigma_hat: f64,
    pub n_detected: usize,
    pub runtime_ms: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.into_iter().collect();
        v.sort_by(f64::total_cmp);
        Self {
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub sigma_true: f64,
    pub reps: usize,
    pub n_detected: Quartiles,
    pub sigma_hat: Quartiles,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub config: SimulationSpec,
    pub true_change_points: usize,
    pub rows: Vec<SimulationRow>,
    pub summary: Vec<MethodSummary>,
}

impl SimulationReport {
    pub fn summary_for(&self, method: &str, sigma: f64) -> Option<&MethodSummary> {
        self.summary
            .iter()
            .find(|s| s.method == method && s.sigma_true == sigma)
    }
}

fn run_replication(spec: &SimulationSpec, sigma: f64, rep: usize) -> Result<Vec<SimulationRow>> {
    let seed = derive_seed(spec.base_seed, rep as u64);
    let series = sample_noisy(&spec.signal, sigma, seed)?;
    spec.methods
        .iter()
        .map(|m| {
            let mut config = m.config.clone();
            if config.selection == Selection::Wbs {
                config.seed = Some(derive_seed(seed, 0x5EED));
            }
            let start = Instant::now();
            let d = detect_change_points(&series, &config)?;
            Ok(SimulationRow {
                replication: rep,
                method: m.name.clone(),
                sigma_true: sigma,
                sigma_hat: d.noise.sigma,
                n_detected: d.change_points.len(),
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
                seed,
            })
        })
        .collect()
}

fn run_all(spec: &SimulationSpec, tasks: &[(f64, usize)]) -> Result<Vec<Vec<SimulationRow>>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let go = || {
            tasks
                .par_iter()
                .map(|&(sigma, rep)| run_replication(spec, sigma, rep))
                .collect::<Result<Vec<_>>>()
        };
        if spec.workers == 0 {
            return go();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::param("workers", e.to_string()))?;
        pool.install(go)
    }
    #[cfg(not(feature = "parallel"))]
    {
        tasks
            .iter()
            .map(|&(sigma, rep)| run_replication(spec, sigma, rep))
            .collect()
    }
}

/// Runs every method on `reps` noisy realizations per noise level.
///
/// Replication `r` uses seed `derive_seed(base_seed, r)` for the noise (the
/// same stream for every sigma) so the row set does not depend on `workers`.
pub fn simulate(spec: &SimulationSpec) -> Result<SimulationReport> {
    if spec.reps == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    if spec.methods.is_empty() {
        return Err(Error::param("methods", "at least one method required"));
    }
    if let Some(&s) = spec.sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::param(
            "sigma",
            format!("{s} is not a valid noise level"),
        ));
    }
    let tasks: Vec<(f64, usize)> = spec
        .sigmas
        .iter()
        .flat_map(|&s| (0..spec.reps).map(move |r| (s, r)))
        .collect();
    let rows: Vec<SimulationRow> = run_all(spec, &tasks)?.into_iter().flatten().collect();

    let mut summary = Vec::new();
    for &sigma in &spec.sigmas {
        for m in &spec.methods {
            let sel = || {
                rows.iter()
                    .filter(|r| r.sigma_true == sigma && r.method == m.name)
            };
            summary.push(MethodSummary {
                method: m.name.clone(),
                sigma_true: sigma,
                reps: sel().count(),
                n_detected: Quartiles::of(sel().map(|r| r.n_detected as f64)),
                sigma_hat: Quartiles::of(sel().map(|r| r.sigma_hat)),
            });
        }
    }
    Ok(SimulationReport {
        config: spec.clone(),
        true_change_points: spec.signal.change_points().len(),
        rows,
        summary,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    #[serde(rename = "T")]
    pub series_len: usize,
    pub intervals: usize,
    pub total_length: usize,
    pub median_ms: f64,
    pub min_ms: f64,
}

/// Seeded interval workload and greedy-path wall time on a noisy constant
/// series, per series length.
pub fn bench(
    lengths: &[usize],
    decay: f64,
    min_len: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if repeats == 0 {
        return Err(Error::param("repeats", "must be at least 1"));
    }
    lengths
        .iter()
        .map(|&t| {
            if t < 4 {
                return Err(Error::param("T", format!("{t} < 4")));
            }
            let set = seeded_intervals(t, decay, min_len)?;
            let flat = PiecewiseSignal::new(t, vec![], vec![0.0])?;
            let series = sample_noisy(&flat, 1.0, derive_seed(seed, t as u64))?;
            let mut times: Vec<f64> = (0..repeats)
                .map(|_| {
                    let start = Instant::now();
                    let path = greedy_path(&series, &set)?;
                    std::hint::black_box(path.len());
                    Ok(start.elapsed().as_secs_f64() * 1e3)
                })
                .collect::<Result<_>>()?;
            times.sort_by(f64::total_cmp);
            Ok(BenchRow {
                series_len: t,
                intervals: set.len(),
                total_length: set.total_length(),
                median_ms: times[(times.len() - 1) / 2],
                min_ms: times[0],
            })
        })
        .collect()
}
