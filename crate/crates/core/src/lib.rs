// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change point detection in the Gaussian change-in-mean model.
//!
//! The crate is organised bottom-up:
//!
//! * [`signals`] builds piecewise-constant test signals and samples noisy
//!   realizations from a seeded generator.
//! * [`intervals`] generates deterministic seeded intervals (plus the random
//!   intervals of wild binary segmentation, used as a baseline).
//! * [`cusum`] evaluates CUSUM contrasts in O(1) per split via prefix sums.
//! * [`segmentation`] turns evaluated intervals into change point candidates:
//!   greedy solution paths, narrowest-over-threshold selection and the
//!   adaptive variant that regenerates intervals between detections.
//! * [`noise`] estimates the noise level (jump filtered estimator, MAD, ...).
//! * [`model_selection`] prunes solution paths with a universal threshold or
//!   one of two BIC conventions.
//! * [`harness`] wires everything into detection, simulation and benchmark
//!   runs with serialisable reports.

#![forbid(unsafe_code)]

pub mod cusum;
pub mod error;
pub mod harness;
pub mod intervals;
pub mod model_selection;
pub mod noise;
pub mod rng;
pub mod segmentation;
pub mod series_io;
pub mod signals;
mod splits;
mod stats;

pub use cusum::{cusum_at, max_cusum, CusumResult, PrefixSums};
pub use error::{Error, Result};
pub use intervals::{
    augment_small_intervals, random_intervals, seeded_intervals, Interval, IntervalKind,
    IntervalMeta, IntervalSet,
};
pub use model_selection::{
    bic_known_variance, bic_unknown_variance, bic_unknown_variance_capped, default_bic_penalty,
    default_max_cpts, fit_means, universal_threshold, PiecewiseFit,
};
pub use noise::{
    empirical_variance, ensemble_sigma, jfnl, jfnl_lag, mad_sigma, NoiseEstimate, NoiseMethod,
};
pub use segmentation::{
    aseedbs, aseedbs_path, greedy_path, not_select, threshold_prune, wbs_baseline, ChangePointSet,
    PathNode, SelectionRule, SolutionPath,
};
pub use signals::{
    load_signal_spec, make_stairs, make_teeth, sample_noisy, PiecewiseSignal, SignalSpec,
    TimeSeries,
};
