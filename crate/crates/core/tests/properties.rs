// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io::Write;

use proptest::prelude::*;

use seedbs::intervals::seeded_layers;
use seedbs::noise::{jfnl_inner, jfnl_tilde};
use seedbs::series_io::{format_series, read_series};
use seedbs::signals::{extreme_teeth, load_signal_spec};
use seedbs::*;

type Estimator = fn(&TimeSeries) -> Result<NoiseEstimate>;

fn series(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 3..=max_len)
}

fn interval_in(len: usize) -> impl Strategy<Value = (usize, usize)> {
    (0..len - 1).prop_flat_map(move |s| (Just(s), s + 2..=len))
}

fn teeth_like() -> impl Strategy<Value = TimeSeries> {
    (2usize..8, 3usize..12, 0.05f64..0.8, any::<u64>()).prop_map(|(seg, n, sigma, seed)| {
        let sig = signals::make_teeth(seg, n, 0.0, 1.0).unwrap();
        sample_noisy(&sig, sigma, seed).unwrap()
    })
}

fn path_for(x: &TimeSeries) -> SolutionPath {
    let set = seeded_intervals(x.len(), std::f64::consts::SQRT_2, 2).unwrap();
    greedy_path(x, &set).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 200,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn cusum_translation_and_scale(
        (x, (s, e)) in series(40).prop_flat_map(|x| { let n = x.len(); (Just(x), interval_in(n)) }),
        c in -100.0f64..100.0,
        alpha in -5.0f64..5.0,
    ) {
        let ps = PrefixSums::new(&x);
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let scaled: Vec<f64> = x.iter().map(|v| v * alpha).collect();
        let (ps_c, ps_a) = (PrefixSums::new(&shifted), PrefixSums::new(&scaled));
        for b in s + 1..e {
            let base = cusum_at(&ps, s, e, b).unwrap();
            let tol = 1e-9 * (1.0 + base + c.abs());
            prop_assert!((cusum_at(&ps_c, s, e, b).unwrap() - base).abs() < tol);
            prop_assert!((cusum_at(&ps_a, s, e, b).unwrap() - alpha.abs() * base).abs() < 1e-9 * (1.0 + base));
        }
    }

    #[test]
    fn single_jump_argmax_is_the_jump(len in 3usize..60, jump_at in 1usize..59, delta in 0.1f64..10.0) {
        prop_assume!(jump_at < len);
        let x: Vec<f64> = (0..len).map(|t| if t < jump_at { 0.0 } else { delta }).collect();
        let r = max_cusum(&PrefixSums::new(&x), Interval::new(0, len).unwrap());
        prop_assert_eq!(r.best_split, jump_at);
    }

    #[test]
    fn threshold_pruning_is_monotone(x in teeth_like(), l1 in 0.0f64..2.0, l2 in 0.0f64..2.0) {
        let path = path_for(&x);
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let big = threshold_prune(&path, lo);
        let small = threshold_prune(&path, hi);
        prop_assert!(small.positions().iter().all(|p| big.positions().contains(p)));
    }

    #[test]
    fn pruning_equals_a_path_prefix(x in teeth_like(), lambda in 0.0f64..2.0) {
        let path = path_for(&x);
        let k = path.nodes().iter().take_while(|n| n.value() > lambda).count();
        prop_assert_eq!(threshold_prune(&path, lambda), path.prefix(k));
        prop_assert!(path.nodes().windows(2).all(|w| w[0].value() >= w[1].value()));
    }

    #[test]
    fn selections_are_pure(x in teeth_like(), lambda in 0.01f64..1.5) {
        let set = seeded_intervals(x.len(), 1.3, 2).unwrap();
        prop_assert_eq!(greedy_path(&x, &set).unwrap(), greedy_path(&x, &set).unwrap());
        prop_assert_eq!(not_select(&x, &set, lambda).unwrap(), not_select(&x, &set, lambda).unwrap());
        prop_assert_eq!(aseedbs(&x, 1.3, 2, lambda).unwrap(), aseedbs(&x, 1.3, 2, lambda).unwrap());
    }

    #[test]
    fn aseedbs_stop_equals_pruned_path(x in teeth_like(), lambda in 0.01f64..1.5) {
        let path = aseedbs_path(&x, std::f64::consts::SQRT_2, 2).unwrap();
        prop_assert_eq!(
            aseedbs(&x, std::f64::consts::SQRT_2, 2, lambda).unwrap(),
            threshold_prune(&path, lambda)
        );
    }

    #[test]
    fn noise_estimators_shift_and_scale(x in series(80), c in -50.0f64..50.0, alpha in 0.1f64..10.0) {
        let x = TimeSeries::new(x).unwrap();
        let xc = x.shifted(c).unwrap();
        let xa = x.scaled(alpha).unwrap();
        let a2 = alpha * alpha;
        let pairs: [(Estimator, bool); 3] =
            [(jfnl, true), (mad_sigma, true), (jfnl_tilde, false)];
        for (f, shift_invariant) in pairs {
            let base = f(&x).unwrap().sigma2;
            prop_assert!(base >= 0.0);
            let tol = 1e-8 * (1.0 + base);
            if shift_invariant {
                prop_assert!((f(&xc).unwrap().sigma2 - base).abs() < 1e-6 * (1.0 + base + c * c));
            }
            prop_assert!((f(&xa).unwrap().sigma2 - a2 * base).abs() < a2 * tol);
        }
        let lag = jfnl_lag(&x, 1, 2, true).unwrap().sigma2;
        prop_assert!((lag - jfnl(&x).unwrap().sigma2).abs() < 1e-12);
    }

    #[test]
    fn layers_cover_every_position(t in 2usize..400, decay in 1.05f64..=2.0, min_len in 2usize..20) {
        let layers = seeded_layers(t, decay, min_len).unwrap();
        for layer in &layers {
            let len = layer[0].len();
            prop_assert!(layer.iter().all(|i| i.len() == len && i.end <= t));
            for p in 1..t {
                prop_assert!(layer.iter().any(|i| i.start < p && p < i.end), "p={} uncovered", p);
            }
        }
        let set = seeded_intervals(t, decay, min_len).unwrap();
        prop_assert_eq!(&set, &seeded_intervals(t, decay, min_len).unwrap());
    }

    #[test]
    fn rss_is_non_increasing_and_bic_shift_invariant(x in teeth_like(), c in -20.0f64..20.0) {
        let path = path_for(&x);
        let rss: Vec<f64> = (0..=path.len()).map(|k| fit_means(&x, &path.prefix(k)).unwrap().rss).collect();
        prop_assert!(rss.windows(2).all(|w| w[1] <= w[0] + 1e-9));

        let xc = x.shifted(c).unwrap();
        let path_c = path_for(&xc);
        let pen = default_bic_penalty(x.len());
        prop_assert_eq!(
            bic_unknown_variance(&path, &x, pen).unwrap().change_points.positions().to_vec(),
            bic_unknown_variance(&path_c, &xc, pen).unwrap().change_points.positions().to_vec()
        );
        prop_assert_eq!(
            bic_known_variance(&path, &x, 0.1, 2.0).unwrap().change_points.positions().to_vec(),
            bic_known_variance(&path_c, &xc, 0.1, 2.0).unwrap().change_points.positions().to_vec()
        );
    }

    #[test]
    fn bic_known_joint_rescaling(x in teeth_like(), alpha in 0.2f64..5.0, sigma2 in 0.01f64..1.0) {
        let xa = x.scaled(alpha).unwrap();
        let a = bic_known_variance(&path_for(&x), &x, sigma2, 2.0).unwrap();
        let b = bic_known_variance(&path_for(&xa), &xa, alpha * alpha * sigma2, 2.0).unwrap();
        prop_assert_eq!(a.change_points.positions(), b.change_points.positions());
    }

    #[test]
    fn universal_threshold_is_increasing(s in 0.01f64..5.0, t in 3.0f64..1e6, c in 0.1f64..3.0) {
        let base = universal_threshold(s, t, c);
        prop_assert!(universal_threshold(s * 1.01, t, c) > base);
        prop_assert!(universal_threshold(s, t * 1.01, c) > base);
        prop_assert!(universal_threshold(s, t, c * 1.01) > base);
    }
}

#[test]
fn finer_decay_workload_ratio() {
    let fine = 2f64.powf(0.125);
    for t in [1 << 10, 1 << 12, 1 << 14] {
        let a = seeded_intervals(t, fine, 2).unwrap().len() as f64;
        let b = seeded_intervals(t, std::f64::consts::SQRT_2, 2)
            .unwrap()
            .len() as f64;
        let ratio = a / b;
        assert!((2.0..=8.0).contains(&ratio), "T={t}: ratio {ratio}");
    }
}

#[test]
fn jfnl_inner_small_on_noiseless_teeth() {
    let x = TimeSeries::new(extreme_teeth().values()).unwrap();
    let inner = jfnl_inner(&x).unwrap();
    assert!(inner.abs() <= 0.05, "inner {inner}");
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let values = vec![0.5, -1.25, 3.0, 1e-7];
    let path = dir.path().join("series.txt");
    std::fs::write(&path, format_series(&values)).unwrap();
    assert_eq!(read_series(&path).unwrap().values(), values.as_slice());

    let spec = dir.path().join("signal.json");
    let mut f = std::fs::File::create(&spec).unwrap();
    write!(
        f,
        r#"{{"T": 12, "change_points": [4, 8], "means": [0, 2, 1], "name": "demo"}}"#
    )
    .unwrap();
    drop(f);
    let sig = load_signal_spec(&spec).unwrap();
    assert_eq!(sig.change_points(), &[4, 8]);
    assert_eq!(sig.name(), Some("demo"));
    assert!(matches!(
        read_series(dir.path().join("missing")),
        Err(Error::Io(_))
    ));
}
