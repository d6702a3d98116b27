use std::collections::BTreeMap;

use odmr::fitting::{FitParam, FitReport, GridRecord, MeasurementGrid};
use odmr::io::{
    fit_report_from_text, fit_report_to_text, grid_from_text, grid_to_text, synth_spectrum, Spectrum, SpectrumMeta,
};
use odmr::lineshape::HyperfineModel;
use odmr::Error;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        (-300.0..300.0f64).prop_map(|e| 10f64.powf(e)),
        Just(0.0),
        Just(-0.0)
    ]
}

fn meta() -> impl Strategy<Value = SpectrumMeta> {
    let key = "[a-z][a-z_]{0,7}".prop_filter("reserved", |k| {
        !["power_mw", "rabi_mhz", "delta_side_mhz", "sample_id"].contains(&k.as_str())
    });
    (
        proptest::option::of(0.0..1e3f64),
        proptest::option::of(0.0..10.0f64),
        proptest::option::of("[A-Za-z0-9_.-]{1,12}"),
        proptest::option::of(0.0..100.0f64),
        prop::collection::btree_map(key, "[A-Za-z0-9_.-]{1,12}", 0..4),
    )
        .prop_map(|(power_mw, rabi_mhz, sample_id, delta_side_mhz, extra)| SpectrumMeta {
            power_mw,
            rabi_mhz,
            sample_id,
            delta_side_mhz,
            extra: extra.into_iter().collect::<BTreeMap<_, _>>(),
        })
}

fn spectrum() -> impl Strategy<Value = Spectrum> {
    (
        prop::collection::vec((1e-9..10.0f64, finite(), 1e-12..1e3f64), 1..60),
        -1e4..1e4f64,
        meta(),
    )
        .prop_map(|(rows, start, meta)| {
            let mut f = start;
            let mut s = Spectrum {
                meta,
                ..Spectrum::default()
            };
            for (step, y, sig) in rows {
                f += step;
                s.freq_mhz.push(f);
                s.signal.push(y);
                s.sigma.push(sig);
            }
            s
        })
}

fn ci() -> impl Strategy<Value = f64> {
    prop_oneof![4 => 0.0..1e3f64, 1 => Just(f64::INFINITY)]
}

fn report() -> impl Strategy<Value = FitReport> {
    (
        prop::collection::vec(("[a-z_]{1,10}", finite(), ci()), 1..8),
        (0.0..1e3f64, 0.0..1e6f64, 0usize..10_000, any::<bool>(), 0usize..200),
        prop::collection::vec((2000.0..3000.0f64, 0.0..30.0f64), 0..3),
        prop::collection::vec("[a-z_]{1,10}", 0..3),
        prop::collection::vec("[ -~]{0,30}", 0..3),
    )
        .prop_map(|(params, (rms, chi, n, conv, it), windows, unident, notes)| FitReport {
            dof: n.saturating_sub(params.len()),
            params: params
                .into_iter()
                .map(|(name, value, ci68)| FitParam { name, value, ci68 })
                .collect(),
            residual_rms: rms,
            chi_square: chi,
            n_points: n,
            converged: conv,
            iterations: it,
            excluded_ranges: windows.into_iter().map(|(lo, w)| (lo, lo + w)).collect(),
            unidentifiable: unident,
            notes,
        })
}

fn grid() -> impl Strategy<Value = MeasurementGrid> {
    prop::collection::vec(
        (
            1e-3..1e3f64,
            1e-3..5.0f64,
            finite(),
            1e-9..10.0f64,
            finite(),
            1e-12..1.0f64,
        ),
        0..30,
    )
    .prop_map(|rows| {
        MeasurementGrid::new(
            rows.into_iter()
                .enumerate()
                // Offset powers so every (P, f_R) pair is distinct.
                .map(|(i, (p, f, w, ws, a, as_))| GridRecord {
                    power_mw: p + i as f64 * 1e3,
                    rabi_hz: f,
                    width_hz: w,
                    width_sigma: ws,
                    amplitude: a,
                    amplitude_sigma: as_,
                })
                .collect(),
        )
    })
}

proptest! {
    #[test]
    fn spectrum_round_trips_exactly(s in spectrum()) {
        let back = Spectrum::from_text(&s.to_text()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn fit_report_round_trips_exactly(r in report()) {
        let back = fit_report_from_text(&fit_report_to_text(&r)).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn grid_round_trips_exactly(g in grid()) {
        let back = grid_from_text(&grid_to_text(&g)).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn synthetic_spectra_depend_only_on_seed(seed in any::<u64>(), noise in 1e-5..1e-2f64) {
        let truth = HyperfineModel::new(5e-3, 2654.0, 2.0);
        let a = synth_spectrum(&truth, None, noise, seed, None).unwrap();
        let b = synth_spectrum(&truth, None, noise, seed, None).unwrap();
        prop_assert_eq!(a.to_text(), b.to_text());
    }
}

#[test]
fn synthetic_noise_has_requested_spread() {
    let truth = HyperfineModel::new(5e-3, 2654.0, 2.0);
    let grid: Vec<f64> = (0..10_000).map(|i| 2500.0 + 0.03 * i as f64).collect();
    for (seed, noise) in [(1, 1e-3), (2, 3e-4), (3, 1e-2)] {
        let s = synth_spectrum(&truth, None, noise, seed, Some(&grid)).unwrap();
        let r: Vec<f64> = grid.iter().zip(&s.signal).map(|(nu, y)| y - truth.eval(*nu)).collect();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let sd = (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r.len() - 1) as f64).sqrt();
        assert!((sd / noise - 1.0).abs() < 0.1, "sd {sd} for noise {noise}");
    }
}

#[test]
fn noise_free_synthesis_is_the_model() {
    let truth = HyperfineModel::new(5e-3, 2654.0, 2.0);
    let s = synth_spectrum(&truth, None, 0.0, 9, None).unwrap();
    for (nu, y) in s.freq_mhz.iter().zip(&s.signal) {
        assert_eq!(*y, truth.eval(*nu));
    }
}

#[test]
fn malformed_files_report_where() {
    let nan = "freq_mhz signal sigma\n1 0.9 0.1\n2 NaN 0.1\n";
    assert!(matches!(
        Spectrum::from_text(nan),
        Err(Error::Parse { line: 3, column: 3, .. })
    ));
    let missing = "freq_mhz signal\n1 0.9\n";
    assert!(matches!(Spectrum::from_text(missing), Err(Error::Schema(_))));
    let unordered = "freq_mhz signal sigma\n2 0.9 0.1\n1 0.9 0.1\n";
    assert!(matches!(Spectrum::from_text(unordered), Err(Error::Schema(_))));
}

#[test]
fn annotated_format_examples_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("formats");
    let spec = odmr::io::read_spectrum(&dir.join("spectrum.txt")).unwrap();
    assert_eq!(spec.len(), 13);
    assert_eq!(spec.meta.power_mw, Some(5.0));
    assert_eq!(spec.meta.extra.keys().collect::<Vec<_>>(), ["model", "seed"]);

    let grid = odmr::io::read_grid(&dir.join("grid.txt")).unwrap();
    assert_eq!(grid.len(), 8);

    let report = odmr::io::read_fit_report(&dir.join("fit_report.txt")).unwrap();
    assert_eq!(report.params.len(), 3);
    assert_eq!(report.excluded_ranges.len(), 2);
}
