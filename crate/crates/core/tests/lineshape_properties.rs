use odmr::lineshape::{
    approx_total_width, contrast_argmax_power, convolve_inhomogeneous, total_width_model, triple_lorentzian,
    ContrastModelParams, HyperfineModel, InhomogeneousDist, P1RateForm, WidthModelParams, GAUSSIAN_FWHM_PER_SIGMA,
};
use odmr::numeric::{lin_space, sampled_fwhm};
use odmr::spin::LineshapeSummary;
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// Ensemble FWHM on a grid spanning 21 combined widths with 100 points per
/// combined width.
fn ensemble_fwhm(dist: &InhomogeneousDist, hom: f64) -> f64 {
    let summary = LineshapeSummary {
        contrast: 0.02,
        fwhm_hz: hom,
        baseline: 1.0,
    };
    let total = dist.fwhm_inh_hz + hom;
    let grid = lin_space(-10.5 * total, 10.5 * total, 2101);
    let y = convolve_inhomogeneous(dist, &summary, &grid).unwrap();
    sampled_fwhm(&grid, &y, 1.0).unwrap()
}

/// Brute-force Riemann-sum convolution of a Gaussian density with a unit
/// Lorentzian, both sampled on the same uniform grid.
fn discrete_voigt_fwhm(gauss_fwhm: f64, lor_fwhm: f64, step: f64) -> f64 {
    let sigma = gauss_fwhm / GAUSSIAN_FWHM_PER_SIGMA;
    let hw = 0.5 * lor_fwhm;
    let reach = 8.0 * sigma;
    let k = (reach / step).ceil() as i64;
    let weights: Vec<(f64, f64)> = (-k..=k)
        .map(|i| {
            let x = i as f64 * step;
            (x, (-0.5 * (x / sigma).powi(2)).exp())
        })
        .collect();
    let norm: f64 = weights.iter().map(|w| w.1).sum();
    let span = 10.0 * (gauss_fwhm + lor_fwhm);
    let n = (span / step) as i64;
    let grid: Vec<f64> = (-n..=n).map(|i| i as f64 * step).collect();
    let y: Vec<f64> = grid
        .iter()
        .map(|nu| {
            let s: f64 = weights
                .iter()
                .map(|(x, w)| w * hw * hw / ((nu - x).powi(2) + hw * hw))
                .sum();
            1.0 - s / norm
        })
        .collect();
    sampled_fwhm(&grid, &y, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn lorentzian_widths_add(inh in log_uniform(0.1, 50.0), hom in log_uniform(0.1, 50.0)) {
        let w = ensemble_fwhm(&InhomogeneousDist::lorentzian(inh, 0.0), hom);
        prop_assert!((w / (inh + hom) - 1.0).abs() < 5e-3, "{w} vs {}", inh + hom);
    }

    #[test]
    fn voigt_width_is_bracketed(inh in log_uniform(0.1, 50.0), hom in log_uniform(0.1, 50.0)) {
        let w = ensemble_fwhm(&InhomogeneousDist::gaussian(inh, 0.0), hom);
        prop_assert!(w > inh.max(hom) && w < inh + hom, "{w} outside ({}, {})", inh.max(hom), inh + hom);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn voigt_matches_brute_force_and_olivero(inh in log_uniform(0.3, 10.0), hom in log_uniform(0.3, 10.0)) {
        let w = ensemble_fwhm(&InhomogeneousDist::gaussian(inh, 0.0), hom);
        // Ten times finer than the finest grid convolve_inhomogeneous accepts.
        let step = inh.max(hom) / 200.0;
        let brute = discrete_voigt_fwhm(inh, hom, step);
        prop_assert!((w / brute - 1.0).abs() < 1e-3, "{w} vs brute {brute}");
        let olivero = 0.5346 * hom + (0.2166 * hom * hom + inh * inh).sqrt();
        prop_assert!((w / olivero - 1.0).abs() < 1e-3, "{w} vs olivero {olivero}");
    }
}

proptest! {
    #[test]
    fn width_model_reduces_without_p1_and_saturation(
        dnu in 0.1..10.0f64,
        ratio in 1e-4..1e-2f64,
        c in 1e-3..0.1f64,
        power in 1e-3..100.0f64,
        rabi in 0.01..3.0f64,
        gamma2 in 0.1..5.0f64,
    ) {
        let params = WidthModelParams {
            dnu_inh_hz: dnu,
            ratio_g1_g2: ratio,
            a_over_g2: vec![0.0],
            c_over_g2: c,
            p0_mw: f64::INFINITY,
            f0_hz: 1.0,
            p1_form: P1RateForm::Squared,
        };
        let full = total_width_model(&params, power, 0, rabi).unwrap();
        let reduced = approx_total_width(dnu, ratio * gamma2, gamma2, c * gamma2 * power, rabi);
        prop_assert!((full - reduced).abs() <= 1e-12 * reduced, "{full} vs {reduced}");
    }

    #[test]
    fn triplet_without_splitting_is_one_deep_lorentzian(
        amp in 1e-4..0.3f64,
        g in 0.05..10.0f64,
        nus in prop::collection::vec(-50.0..50.0f64, 1..40),
    ) {
        let model = HyperfineModel { amplitude: amp, center_hz: 0.0, hwhm_hz: g, splitting_hz: 0.0 };
        for (nu, y) in nus.iter().zip(triple_lorentzian(&model, &nus)) {
            let single = 1.0 - 3.0 * amp * g * g / (nu * nu + g * g);
            prop_assert!((y - single).abs() < 1e-12);
        }
    }

    #[test]
    fn contrast_optimum_moves_to_higher_power_with_drive(
        theta in 1e-3..0.3f64,
        r in 0.05..5.0f64,
        q in 1e-4..0.05f64,
    ) {
        let params = ContrastModelParams { theta, g1_over_c_mw: r, g1g2: q };
        let p: Vec<f64> = [0.1, 0.5, 1.5]
            .iter()
            .map(|&f| contrast_argmax_power(&params, f, 1e-6, 1e8).0)
            .collect();
        prop_assert!(p[0] < p[1] && p[1] < p[2], "{p:?}");
    }
}
