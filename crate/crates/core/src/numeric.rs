//! Small numerical kernels shared across the crate: dense steady-state
//! solves, half-depth width extraction, quadrature and 1-D search.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Reciprocal condition number below which a steady-state system is treated
/// as singular.
const RCOND_FLOOR: f64 = 1e-14;

/// Solves `a x = b`, refusing systems that are singular to working precision.
pub fn solve_dense(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin / smax < RCOND_FLOOR {
        return Err(Error::DegenerateSystem(format!(
            "steady-state matrix is singular (rcond {:e})",
            if smax > 0.0 { smin / smax } else { 0.0 }
        )));
    }
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::DegenerateSystem("LU factorisation failed".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSystem("non-finite steady state".into()));
    }
    Ok(x)
}

/// Full width at half depth of a lineshape that is symmetric about zero
/// detuning and decays monotonically towards `baseline`.
///
/// The half-depth crossing is bracketed by a geometric scan starting from
/// `scale_hint` and then refined by bisection.
pub fn symmetric_fwhm<F>(mut signal: F, baseline: f64, scale_hint: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let depth0 = signal(0.0)? - baseline;
    if depth0 == 0.0 || !depth0.is_finite() {
        return Err(Error::DegenerateSystem(
            "lineshape has no resonant depth; width undefined".into(),
        ));
    }
    let mut rel = |x: f64| -> Result<f64> { Ok((signal(x)? - baseline) / depth0) };

    let mut x = if scale_hint.is_finite() && scale_hint > 0.0 {
        scale_hint
    } else {
        1.0
    };
    let (mut lo, mut hi);
    if rel(x)? >= 0.5 {
        let mut n = 0;
        loop {
            let next = 2.0 * x;
            if rel(next)? < 0.5 {
                lo = x;
                hi = next;
                break;
            }
            x = next;
            n += 1;
            if n > 2000 {
                return Err(Error::DegenerateSystem("half-depth point not bracketed".into()));
            }
        }
    } else {
        let mut n = 0;
        loop {
            let next = 0.5 * x;
            if rel(next)? >= 0.5 {
                lo = next;
                hi = x;
                break;
            }
            x = next;
            n += 1;
            if n > 2000 {
                return Err(Error::DegenerateSystem("half-depth point not bracketed".into()));
            }
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if rel(mid)? >= 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(lo + hi)
}

/// Full width at half depth of a sampled resonance, measured relative to
/// `baseline`. Crossings are located by linear interpolation between samples.
pub fn sampled_fwhm(x: &[f64], y: &[f64], baseline: f64) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InsufficientData("need at least 3 samples".into()));
    }
    let (imax, depth) = y
        .iter()
        .map(|v| v - baseline)
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty");
    if depth == 0.0 {
        return Err(Error::InsufficientData("flat lineshape".into()));
    }
    let half = 0.5 * depth.abs();
    let level = |i: usize| (y[i] - baseline) * depth.signum();

    let mut right = None;
    for i in imax..x.len() - 1 {
        if level(i + 1) < half {
            let t = (level(i) - half) / (level(i) - level(i + 1));
            right = Some(x[i] + t * (x[i + 1] - x[i]));
            break;
        }
    }
    let mut left = None;
    for i in (1..=imax).rev() {
        if level(i - 1) < half {
            let t = (level(i) - half) / (level(i) - level(i - 1));
            left = Some(x[i] - t * (x[i] - x[i - 1]));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::InsufficientData(
            "half-depth crossing lies outside the sampled range".into(),
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Adaptive Simpson over `[a, b]` split at the supplied interior breakpoints
/// (points outside the interval are ignored).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&p| p > a && p < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let n = (pts.len() - 1) as f64;
    pts.windows(2).map(|w| adaptive_simpson(f, w[0], w[1], tol / n)).sum()
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + c.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `n` points spaced uniformly in log between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (l0, l1) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `n` points spaced uniformly between `lo` and `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Shortest decimal form that parses back to the same `f64`; non-finite
/// values print as `inf`, `-inf` and `nan`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:?}")
    }
}

/// Inverse of [`format_f64`].
pub fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fwhm_of_exact_lorentzian() {
        let hw = 0.37;
        let w = symmetric_fwhm(|x| Ok(1.0 - 0.2 * hw * hw / (x * x + hw * hw)), 1.0, 10.0).unwrap();
        assert!((w - 2.0 * hw).abs() < 1e-12);
    }

    #[test]
    fn fwhm_without_depth_is_degenerate() {
        assert!(symmetric_fwhm(|_| Ok(1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn simpson_integrates_gaussian() {
        let f = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = integrate_with_breaks(&f, -40.0, 40.0, &[0.0, -1.0, 1.0], 1e-12);
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn golden_finds_parabola_top() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_system_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        assert!(matches!(solve_dense(a, b), Err(Error::DegenerateSystem(_))));
    }

    #[test]
    fn float_text_round_trips() {
        for v in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ] {
            assert_eq!(parse_f64(&format_f64(v)).unwrap().to_bits(), v.to_bits());
        }
        assert!(parse_f64(&format_f64(f64::NAN)).unwrap().is_nan());
        assert_eq!(format_f64(1.0), "1.0");
    }

    #[test]
    fn log_space_endpoints_exact() {
        let g = log_space(0.02, 500.0, 12);
        assert_eq!(g.len(), 12);
        assert_eq!(g[0], 0.02);
        assert_eq!(g[11], 500.0);
    }
}
