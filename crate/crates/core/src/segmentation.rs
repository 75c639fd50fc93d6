// SPDX-License-Identifier: MIT OR Apache-2.0

//! Binary segmentation over precomputed candidate intervals.
//!
//! The greedy recursion ("split the current segment at the best CUSUM among
//! intervals inside it, recurse left and right") is computed by one sweep
//! over all evaluated intervals in rank order: an interval is accepted iff no
//! earlier accepted split lies strictly inside it. Every child segment's best
//! interval was also a candidate for its parent segment, so ranks decrease
//! down the recursion tree and the sweep visits recursion nodes in the same
//! order a best-first traversal would. The same argument applies to NOT
//! selection with the rank "shorter first, then leftmost".

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::cusum::{evaluate_all, CusumResult, PrefixSums};
use crate::error::{Error, Result};
use crate::intervals::{random_intervals, seeded_intervals, Interval, IntervalMeta, IntervalSet};
use crate::signals::TimeSeries;
use crate::splits::SplitSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionRule {
    Greedy,
    Not,
    Adaptive,
    Wbs,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathNode {
    pub candidate: CusumResult,
    /// Segment being split when this node was selected.
    pub segment: Interval,
    /// Node whose split created `segment`; `None` for the root.
    pub parent: Option<usize>,
    /// Detection rank (position in [`SolutionPath::nodes`]).
    pub order: usize,
}

impl PathNode {
    pub fn split(&self) -> usize {
        self.candidate.best_split
    }

    pub fn value(&self) -> f64 {
        self.candidate.value
    }
}

/// Change point candidates in detection order.
///
/// Parents always precede their children, so every prefix of `nodes` is a
/// parent-closed model. For greedy paths values are non-increasing along the
/// node list and prefixes coincide with threshold prunings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionPath {
    nodes: Vec<PathNode>,
    series_len: usize,
    interval_meta: Option<IntervalMeta>,
    rule: SelectionRule,
}

impl SolutionPath {
    pub fn nodes(&self) -> &[PathNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }

    pub fn rule(&self) -> SelectionRule {
        self.rule
    }

    pub fn interval_meta(&self) -> Option<&IntervalMeta> {
        self.interval_meta.as_ref()
    }

    /// Model formed by the first `k` nodes.
    pub fn prefix(&self, k: usize) -> ChangePointSet {
        ChangePointSet::from_unsorted(
            self.nodes[..k.min(self.nodes.len())]
                .iter()
                .map(|n| (n.split(), n.value()))
                .collect(),
        )
    }
}

/// Sorted, distinct change point positions in `[1, T-1]` with the CUSUM value
/// each had when detected.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ChangePointSet {
    positions: Vec<usize>,
    scores: Vec<f64>,
}

impl ChangePointSet {
    pub fn new(series_len: usize, mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::param(
                "change_points",
                format!("duplicate {}", w[0].0),
            ));
        }
        if let Some(p) = pairs.iter().find(|p| p.0 == 0 || p.0 >= series_len) {
            return Err(Error::param(
                "change_points",
                format!("{} outside [1, {}]", p.0, series_len.saturating_sub(1)),
            ));
        }
        Ok(Self::from_sorted(pairs))
    }

    pub(crate) fn from_unsorted(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        Self::from_sorted(pairs)
    }

    fn from_sorted(pairs: Vec<(usize, f64)>) -> Self {
        let (positions, scores) = pairs.into_iter().unzip();
        Self { positions, scores }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn check_intervals(series: &TimeSeries, intervals: &IntervalSet) -> Result<()> {
    let t = series.len();
    if let Some(iv) = intervals.intervals().iter().find(|iv| iv.end > t) {
        return Err(Error::param(
            "intervals",
            format!("({}, {}] exceeds series length {t}", iv.start, iv.end),
        ));
    }
    Ok(())
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::param("threshold", "must be positive"));
    }
    Ok(())
}

/// Accepts candidates in the given order whenever no accepted split lies
/// strictly inside their interval.
fn sweep<I>(series_len: usize, ordered: I) -> Vec<PathNode>
where
    I: IntoIterator<Item = CusumResult>,
{
    let mut splits = SplitSet::new(series_len);
    let mut nodes = Vec::new();
    for cand in ordered {
        if splits.len() + 1 >= series_len {
            break;
        }
        let Interval { start, end } = cand.interval;
        let right = splits.next(start + 1);
        if right.is_some_and(|(b, _)| b < end) {
            continue;
        }
        let left = splits.prev(start);
        let segment = Interval {
            start: left.map_or(0, |l| l.0),
            end: right.map_or(series_len, |r| r.0),
        };
        let parent = match (left, right) {
            (Some(l), Some(r)) => Some(l.1.max(r.1)),
            (Some(l), None) => Some(l.1),
            (None, Some(r)) => Some(r.1),
            (None, None) => None,
        };
        let order = nodes.len();
        splits.insert(cand.best_split, order);
        nodes.push(PathNode {
            candidate: cand,
            segment,
            parent,
            order,
        });
    }
    nodes
}

/// Complete greedy solution path over the given intervals.
///
/// An empty interval set yields an empty path.
pub fn greedy_path(series: &TimeSeries, intervals: &IntervalSet) -> Result<SolutionPath> {
    check_intervals(series, intervals)?;
    let ps = PrefixSums::new(series.values());
    let mut results = evaluate_all(&ps, intervals.intervals());
    results.sort_unstable_by(CusumResult::rank_cmp);
    Ok(SolutionPath {
        nodes: sweep(series.len(), results),
        series_len: series.len(),
        interval_meta: Some(intervals.meta().clone()),
        rule: SelectionRule::Greedy,
    })
}

/// Keeps nodes whose value exceeds `threshold` and whose parent is kept.
pub fn threshold_prune(path: &SolutionPath, threshold: f64) -> ChangePointSet {
    debug_assert!(
        threshold.is_nan() || threshold >= 0.0,
        "threshold must be non-negative"
    );
    let mut kept = vec![false; path.nodes.len()];
    let mut pairs = Vec::new();
    for (i, node) in path.nodes.iter().enumerate() {
        let parent_ok = node.parent.is_none_or(|p| kept[p]);
        if parent_ok && node.value() > threshold {
            kept[i] = true;
            pairs.push((node.split(), node.value()));
        }
    }
    ChangePointSet::from_unsorted(pairs)
}

/// Narrowest-over-threshold selection.
pub fn not_select(
    series: &TimeSeries,
    intervals: &IntervalSet,
    threshold: f64,
) -> Result<ChangePointSet> {
    check_intervals(series, intervals)?;
    check_threshold(threshold)?;
    let ps = PrefixSums::new(series.values());
    let mut over: Vec<CusumResult> = evaluate_all(&ps, intervals.intervals())
        .into_iter()
        .filter(|r| r.value > threshold)
        .collect();
    over.sort_unstable_by_key(|r| (r.interval.len(), r.interval.start));
    let nodes = sweep(series.len(), over);
    Ok(ChangePointSet::from_unsorted(
        nodes.iter().map(|n| (n.split(), n.value())).collect(),
    ))
}

/// Heap entry ordered so that the best-ranked candidate is the maximum.
struct Pending {
    best: CusumResult,
    segment: Interval,
    parent: Option<usize>,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other.best.rank_cmp(&self.best)
    }
}

fn segment_best(
    ps: &PrefixSums,
    segment: Interval,
    decay: f64,
    min_len: usize,
) -> Result<Option<CusumResult>> {
    if segment.len() < 2 || segment.len() < min_len {
        return Ok(None);
    }
    let local = seeded_intervals(segment.len(), decay, min_len)?;
    let shifted: Vec<Interval> = local
        .intervals()
        .iter()
        .map(|iv| iv.shifted(segment.start))
        .collect();
    Ok(evaluate_all(ps, &shifted)
        .into_iter()
        .min_by(CusumResult::rank_cmp))
}

fn adaptive_nodes(
    series: &TimeSeries,
    decay: f64,
    min_len: usize,
    stop_at: Option<f64>,
) -> Result<Vec<PathNode>> {
    let t = series.len();
    let ps = PrefixSums::new(series.values());
    let root = Interval { start: 0, end: t };
    // validates decay and min_len even when the root is too short to split
    seeded_intervals(t.max(2), decay, min_len)?;
    let mut heap = BinaryHeap::new();
    if let Some(best) = segment_best(&ps, root, decay, min_len)? {
        heap.push(Pending {
            best,
            segment: root,
            parent: None,
        });
    }
    let mut nodes = Vec::new();
    while let Some(Pending {
        best,
        segment,
        parent,
    }) = heap.pop()
    {
        if stop_at.is_some_and(|thr| best.value <= thr) {
            break;
        }
        let order = nodes.len();
        nodes.push(PathNode {
            candidate: best,
            segment,
            parent,
            order,
        });
        let b = best.best_split;
        for child in [
            Interval {
                start: segment.start,
                end: b,
            },
            Interval {
                start: b,
                end: segment.end,
            },
        ] {
            if let Some(best) = segment_best(&ps, child, decay, min_len)? {
                heap.push(Pending {
                    best,
                    segment: child,
                    parent: Some(order),
                });
            }
        }
    }
    Ok(nodes)
}

/// Complete adaptive path: each step regenerates seeded intervals inside every
/// current segment (scaled to the segment length) and splits at the globally
/// best candidate.
pub fn aseedbs_path(series: &TimeSeries, decay: f64, min_len: usize) -> Result<SolutionPath> {
    let nodes = adaptive_nodes(series, decay, min_len, None)?;
    Ok(SolutionPath {
        nodes,
        series_len: series.len(),
        interval_meta: None,
        rule: SelectionRule::Adaptive,
    })
}

/// Adaptive seeded binary segmentation, stopping once the best candidate
/// across all segments no longer exceeds `threshold`.
pub fn aseedbs(
    series: &TimeSeries,
    decay: f64,
    min_len: usize,
    threshold: f64,
) -> Result<ChangePointSet> {
    check_threshold(threshold)?;
    let nodes = adaptive_nodes(series, decay, min_len, Some(threshold))?;
    Ok(ChangePointSet::from_unsorted(
        nodes.iter().map(|n| (n.split(), n.value())).collect(),
    ))
}

/// Greedy path over `draws` random intervals, pruned at `threshold`.
pub fn wbs_path(series: &TimeSeries, draws: usize, seed: u64) -> Result<SolutionPath> {
    let intervals = random_intervals(series.len(), draws, seed)?;
    let mut path = greedy_path(series, &intervals)?;
    path.rule = SelectionRule::Wbs;
    Ok(path)
}

pub fn wbs_baseline(
    series: &TimeSeries,
    draws: usize,
    seed: u64,
    threshold: f64,
) -> Result<ChangePointSet> {
    check_threshold(threshold)?;
    Ok(threshold_prune(&wbs_path(series, draws, seed)?, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusum::max_cusum;
    use crate::intervals::augment_small_intervals;
    use crate::signals::{make_teeth, PiecewiseSignal};

    fn ts(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(v).unwrap()
    }

    /// Direct recursion: best interval inside the current segment, then
    /// recurse on both halves. Returns (split, value, parent split).
    fn naive_greedy(
        x: &[f64],
        intervals: &[Interval],
        seg: Interval,
        parent: Option<usize>,
        out: &mut Vec<(usize, f64, Option<usize>)>,
    ) {
        let ps = PrefixSums::new(x);
        let best = intervals
            .iter()
            .filter(|iv| seg.contains(iv))
            .map(|&iv| max_cusum(&ps, iv))
            .min_by(CusumResult::rank_cmp);
        if let Some(best) = best {
            let b = best.best_split;
            out.push((b, best.value, parent));
            naive_greedy(
                x,
                intervals,
                Interval {
                    start: seg.start,
                    end: b,
                },
                Some(b),
                out,
            );
            naive_greedy(
                x,
                intervals,
                Interval {
                    start: b,
                    end: seg.end,
                },
                Some(b),
                out,
            );
        }
    }

    fn as_triples(path: &SolutionPath) -> Vec<(usize, f64, Option<usize>)> {
        let mut v: Vec<_> = path
            .nodes()
            .iter()
            .map(|n| {
                (
                    n.split(),
                    n.value(),
                    n.parent.map(|p| path.nodes()[p].split()),
                )
            })
            .collect();
        v.sort_by_key(|t| t.0);
        v
    }

    #[test]
    fn sweep_matches_naive_recursion() {
        let x = vec![
            0.3, 1.2, -0.4, 2.2, 2.0, 1.7, -1.0, -0.8, 0.1, 0.5, 3.0, 2.9, 3.3,
        ];
        let series = ts(x.clone());
        for set in [
            IntervalSet::exhaustive(x.len()),
            seeded_intervals(x.len(), 2f64.sqrt(), 2).unwrap(),
            random_intervals(x.len(), 15, 3).unwrap(),
        ] {
            let path = greedy_path(&series, &set).unwrap();
            let mut naive = Vec::new();
            naive_greedy(
                &x,
                set.intervals(),
                Interval {
                    start: 0,
                    end: x.len(),
                },
                None,
                &mut naive,
            );
            naive.sort_by_key(|t| t.0);
            assert_eq!(as_triples(&path), naive);
        }
    }

    #[test]
    fn greedy_path_values_non_increasing() {
        let series = ts((0..40).map(|i| ((i * 7919) % 13) as f64 * 0.1).collect());
        let set = seeded_intervals(40, 2f64.sqrt(), 2).unwrap();
        let path = greedy_path(&series, &set).unwrap();
        assert!(path
            .nodes()
            .windows(2)
            .all(|w| w[0].value() >= w[1].value()));
        for n in path.nodes() {
            if let Some(p) = n.parent {
                assert!(p < n.order);
                let ps = path.nodes()[p].segment;
                assert!(ps.contains(&n.segment) && ps != n.segment);
            }
        }
    }

    #[test]
    fn noiseless_teeth_path() {
        let s = make_teeth(5, 4, 0.0, 1.0).unwrap();
        let series = ts(s.values());
        let set = seeded_intervals(20, 2f64.sqrt(), 2).unwrap();
        let path = greedy_path(&series, &set).unwrap();
        let positive: Vec<usize> = {
            let mut v: Vec<_> = path
                .nodes()
                .iter()
                .filter(|n| n.value() > 0.0)
                .map(|n| n.split())
                .collect();
            v.sort();
            v
        };
        assert_eq!(positive, vec![5, 10, 15]);
        assert_eq!(threshold_prune(&path, 0.0).positions(), &[5, 10, 15]);
        assert!(threshold_prune(&path, f64::INFINITY).is_empty());
    }

    #[test]
    fn constant_and_tiny_series() {
        let series = ts(vec![2.0; 12]);
        let set = seeded_intervals(12, 2f64.sqrt(), 2).unwrap();
        let path = greedy_path(&series, &set).unwrap();
        assert!(!path.is_empty());
        assert!(path.nodes().iter().all(|n| n.value() == 0.0));

        let series = ts(vec![0.0, 1.0]);
        let set = seeded_intervals(2, 2.0, 2).unwrap();
        let path = greedy_path(&series, &set).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path.nodes()[0].split(), 1);

        let empty = IntervalSet::from_intervals(2, [], None).unwrap();
        assert!(greedy_path(&series, &empty).unwrap().is_empty());
    }

    #[test]
    fn not_examples() {
        let s = PiecewiseSignal::new(30, vec![12], vec![0.0, 2.0]).unwrap();
        let series = ts(s.values());
        let set = seeded_intervals(30, 2f64.sqrt(), 2).unwrap();
        assert_eq!(not_select(&series, &set, 0.9).unwrap().positions(), &[12]);
        assert!(not_select(&series, &set, 100.0).unwrap().is_empty());

        let series = ts(make_teeth(5, 4, 0.0, 1.0).unwrap().values());
        let set = seeded_intervals(20, 2f64.sqrt(), 2).unwrap();
        assert_eq!(
            not_select(&series, &set, 0.1).unwrap().positions(),
            &[5, 10, 15]
        );
        assert!(not_select(&series, &set, 0.0).is_err());
    }

    #[test]
    fn adaptive_examples() {
        let series = ts(vec![1.0; 50]);
        assert!(aseedbs(&series, 2f64.sqrt(), 2, 0.1).unwrap().is_empty());

        let s = PiecewiseSignal::new(50, vec![31], vec![0.0, 1.0]).unwrap();
        let series = ts(s.values());
        assert_eq!(
            aseedbs(&series, 2f64.sqrt(), 2, 0.1).unwrap().positions(),
            &[31]
        );

        let s = make_teeth(5, 200, 0.0, 1.0).unwrap();
        let series = ts(s.values());
        let found = aseedbs(&series, 2f64.sqrt(), 2, 0.1).unwrap();
        assert_eq!(found.positions(), s.change_points());
    }

    #[test]
    fn adaptive_threshold_equals_pruned_full_path() {
        let x: Vec<f64> = (0..60)
            .map(|i| ((i * 37) % 11) as f64 * 0.2 + if i > 25 { 1.5 } else { 0.0 })
            .collect();
        let series = ts(x);
        let path = aseedbs_path(&series, 2f64.sqrt(), 2).unwrap();
        for thr in [0.2, 0.5, 1.0, 2.0, 5.0] {
            assert_eq!(
                aseedbs(&series, 2f64.sqrt(), 2, thr).unwrap(),
                threshold_prune(&path, thr)
            );
        }
    }

    #[test]
    fn wbs_is_seed_deterministic() {
        let s = make_teeth(5, 20, 0.0, 1.0).unwrap();
        let series = crate::signals::sample_noisy(&s, 0.3, 4).unwrap();
        let a = wbs_baseline(&series, 200, 9, 0.8).unwrap();
        let b = wbs_baseline(&series, 200, 9, 0.8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn augmented_sets_work_with_greedy() {
        let s = make_teeth(3, 10, 0.0, 1.0).unwrap();
        let series = ts(s.values());
        let set = seeded_intervals(30, 2f64.sqrt(), 2).unwrap();
        let set = augment_small_intervals(&set, 30, 10).unwrap();
        let path = greedy_path(&series, &set).unwrap();
        assert_eq!(threshold_prune(&path, 0.5).positions(), s.change_points());
    }

    #[test]
    fn change_point_set_validation() {
        assert!(ChangePointSet::new(10, vec![(3, 1.0), (3, 2.0)]).is_err());
        assert!(ChangePointSet::new(10, vec![(10, 1.0)]).is_err());
        let c = ChangePointSet::new(10, vec![(7, 1.0), (2, 3.0)]).unwrap();
        assert_eq!(c.positions(), &[2, 7]);
        assert_eq!(c.scores(), &[3.0, 1.0]);
    }
}
