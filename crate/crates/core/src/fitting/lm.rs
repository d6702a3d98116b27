use nalgebra::{DMatrix, DVector};

use super::report::{FitParam, FitReport};
use crate::error::{Error, Result};

/// Internal coordinate used by the solver for a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// Solver works on ln x, which keeps x strictly positive.
    Log,
}

impl Transform {
    fn to_internal(self, x: f64) -> f64 {
        match self {
            Self::Identity => x,
            Self::Log => x.ln(),
        }
    }

    fn to_natural(self, z: f64) -> f64 {
        match self {
            Self::Identity => z,
            Self::Log => z.exp(),
        }
    }

    /// dx/dz at natural value x.
    fn slope(self, x: f64) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Log => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub init: f64,
    pub transform: Transform,
}

impl ParamSpec {
    pub fn new(name: impl Into<String>, init: f64, transform: Transform) -> Self {
        Self {
            name: name.into(),
            init,
            transform,
        }
    }

    pub fn positive(name: impl Into<String>, init: f64) -> Self {
        Self::new(name, init, Transform::Log)
    }

    pub fn free(name: impl Into<String>, init: f64) -> Self {
        Self::new(name, init, Transform::Identity)
    }
}

/// A weighted residual map r(x) = (data − model(x))/σ.
pub trait ResidualModel {
    fn n_residuals(&self) -> usize;

    fn residuals(&self, x: &[f64], out: &mut [f64]);

    /// Writes ∂r/∂x into `jac` and returns true, or returns false to request
    /// the finite-difference fallback.
    fn jacobian(&self, _x: &[f64], _jac: &mut DMatrix<f64>) -> bool {
        false
    }
}

/// Central-difference Jacobian of the residuals, Richardson-extrapolated
/// from steps h and h/2 so truncation error is fourth order.
pub fn finite_difference_jacobian<M: ResidualModel + ?Sized>(model: &M, x: &[f64]) -> DMatrix<f64> {
    let n = model.n_residuals();
    let mut jac = DMatrix::zeros(n, x.len());
    let mut xp = x.to_vec();
    let mut rp = vec![0.0; n];
    let mut rm = vec![0.0; n];
    let mut central = |j: usize, h: f64, out: &mut Vec<f64>| {
        xp[j] = x[j] + h;
        model.residuals(&xp, &mut rp);
        xp[j] = x[j] - h;
        model.residuals(&xp, &mut rm);
        xp[j] = x[j];
        out.clear();
        out.extend(rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)));
    };
    let (mut d1, mut d2) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 0..x.len() {
        let h = 1e-5 * x[j].abs().max(1e-6);
        central(j, h, &mut d1);
        central(j, 0.5 * h, &mut d2);
        for i in 0..n {
            jac[(i, j)] = (4.0 * d2[i] - d1[i]) / 3.0;
        }
    }
    jac
}

/// Largest per-parameter relative deviation ‖J_an − J_fd‖/‖J_an‖ between the
/// model's analytic Jacobian columns and central finite differences at `x`.
/// Zero when the model has no analytic Jacobian.
pub fn jacobian_mismatch<M: ResidualModel + ?Sized>(model: &M, x: &[f64]) -> f64 {
    let mut an = DMatrix::zeros(model.n_residuals(), x.len());
    if !model.jacobian(x, &mut an) {
        return 0.0;
    }
    let fd = finite_difference_jacobian(model, x);
    (0..x.len())
        .map(|j| {
            let norm = an.column(j).norm();
            let diff = (an.column(j) - fd.column(j)).norm();
            if norm > 0.0 {
                diff / norm
            } else {
                diff
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceScaling {
    /// Scale the inverse Gauss-Newton Hessian by χ²/dof.
    #[default]
    ReducedChiSquare,
    /// Treat the supplied σ as exact.
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative parameter-step tolerance.
    pub xtol: f64,
    /// Relative cost-decrease tolerance.
    pub ftol: f64,
    pub covariance: CovarianceScaling,
    /// Singular-value ratio below which a direction counts as unidentified.
    pub rank_tol: f64,
    /// Report unidentified parameters in the FitReport instead of failing.
    pub allow_singular: bool,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            xtol: 1e-10,
            ftol: 1e-12,
            covariance: CovarianceScaling::ReducedChiSquare,
            rank_tol: 1e-9,
            allow_singular: false,
        }
    }
}

const MAX_LOG_STEP: f64 = 2.0;

struct Problem<'a, M: ?Sized> {
    model: &'a M,
    transforms: Vec<Transform>,
}

impl<M: ResidualModel + ?Sized> Problem<'_, M> {
    fn natural(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.transforms).map(|(v, t)| t.to_natural(*v)).collect()
    }

    fn cost(&self, x: &[f64], r: &mut [f64]) -> f64 {
        self.model.residuals(x, r);
        let c = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
        if c.is_finite() {
            c
        } else {
            f64::INFINITY
        }
    }

    fn jacobian_natural(&self, x: &[f64]) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.model.n_residuals(), x.len());
        if self.model.jacobian(x, &mut jac) {
            jac
        } else {
            finite_difference_jacobian(self.model, x)
        }
    }

    fn jacobian_internal(&self, x: &[f64]) -> DMatrix<f64> {
        let mut jz = self.jacobian_natural(x);
        for (j, t) in self.transforms.iter().enumerate() {
            jz.column_mut(j).scale_mut(t.slope(x[j]));
        }
        jz
    }
}

/// Levenberg–Marquardt minimisation of ½Σr² with Marquardt diagonal damping.
pub fn least_squares<M: ResidualModel + ?Sized>(
    model: &M,
    params: &[ParamSpec],
    opts: &LmOptions,
) -> Result<FitReport> {
    let n = model.n_residuals();
    let p = params.len();
    if p == 0 {
        return Err(Error::invalid("params", "nothing to fit"));
    }
    for spec in params {
        let ok = spec.init.is_finite() && (spec.transform == Transform::Identity || spec.init > 0.0);
        if !ok {
            return Err(Error::Config(format!(
                "invalid initial value {} for {}",
                spec.init, spec.name
            )));
        }
    }
    let names: Vec<String> = params.iter().map(|s| s.name.clone()).collect();
    if n < p {
        return Err(Error::UnidentifiableParameter { params: names });
    }
    let prob = Problem {
        model,
        transforms: params.iter().map(|s| s.transform).collect(),
    };
    let mut z: Vec<f64> = params.iter().map(|s| s.transform.to_internal(s.init)).collect();
    let mut x = prob.natural(&z);
    let mut r = vec![0.0; n];
    let mut cost = prob.cost(&x, &mut r);
    if !cost.is_finite() {
        return Err(Error::Config(
            "residuals are not finite at the initial parameters".into(),
        ));
    }

    let mut lambda = 1e-3;
    let mut trial_r = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = cost == 0.0;
    while !converged {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence { iterations, cost });
        }
        iterations += 1;
        let jz = prob.jacobian_internal(&x);
        let rv = DVector::from_column_slice(&r);
        let jtj = jz.tr_mul(&jz);
        let grad = jz.tr_mul(&rv);
        let dmax = jtj.diagonal().max();
        if dmax == 0.0 || grad.amax() == 0.0 {
            break;
        }
        loop {
            let mut a = jtj.clone();
            for i in 0..p {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12 * dmax);
            }
            let step = a.cholesky().map(|c| c.solve(&(-&grad)));
            let Some(mut step) = step else {
                lambda *= 10.0;
                if lambda > 1e16 {
                    converged = true;
                    break;
                }
                continue;
            };
            // A log coordinate that jumps too far can underflow to 0 and
            // never come back, so cap its move at a factor e^MAX_LOG_STEP.
            let log_jump = (0..p)
                .filter(|&j| prob.transforms[j] == Transform::Log)
                .map(|j| step[j].abs())
                .fold(0.0, f64::max);
            if log_jump > MAX_LOG_STEP {
                step *= MAX_LOG_STEP / log_jump;
            }
            let zt: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let xt = prob.natural(&zt);
            let ct = if xt.iter().all(|v| v.is_finite()) {
                prob.cost(&xt, &mut trial_r)
            } else {
                f64::INFINITY
            };
            if ct < cost {
                let znorm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                let small_step = step.norm() <= opts.xtol * (znorm + opts.xtol);
                let small_gain = (cost - ct) <= opts.ftol * cost;
                z = zt;
                x = xt;
                std::mem::swap(&mut r, &mut trial_r);
                cost = ct;
                lambda = (lambda / 10.0).max(1e-12);
                converged = small_step || small_gain || cost == 0.0;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                // No descent direction left at machine precision.
                converged = true;
                break;
            }
        }
    }

    finish(&prob, names, x, &r, iterations, opts)
}

fn finish<M: ResidualModel + ?Sized>(
    prob: &Problem<'_, M>,
    names: Vec<String>,
    x: Vec<f64>,
    r: &[f64],
    iterations: usize,
    opts: &LmOptions,
) -> Result<FitReport> {
    let n = r.len();
    let p = x.len();
    let jx = prob.jacobian_natural(&x);
    let chi_square: f64 = r.iter().map(|v| v * v).sum();
    let dof = n.saturating_sub(p);

    // Column-normalised SVD so the rank test does not depend on units.
    let norms: Vec<f64> = (0..p).map(|j| jx.column(j).norm()).collect();
    let mut js = jx.clone();
    for (j, nj) in norms.iter().enumerate() {
        if *nj > 0.0 {
            js.column_mut(j).scale_mut(1.0 / nj);
        }
    }
    let svd = js.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let smax = svd.singular_values.max();
    let mut flagged = vec![false; p];
    for (j, nj) in norms.iter().enumerate() {
        if *nj == 0.0 || !nj.is_finite() {
            flagged[j] = true;
        }
    }
    let mut inv = DMatrix::<f64>::zeros(p, p);
    for (k, s) in svd.singular_values.iter().enumerate() {
        let row = v_t.row(k);
        if *s <= opts.rank_tol * smax || smax == 0.0 {
            for j in 0..p {
                if row[j].abs() > 0.1 {
                    flagged[j] = true;
                }
            }
        } else {
            inv += row.transpose() * row / (s * s);
        }
    }
    let unidentifiable: Vec<String> = names
        .iter()
        .zip(&flagged)
        .filter(|(_, f)| **f)
        .map(|(n, _)| n.clone())
        .collect();
    if !unidentifiable.is_empty() && !opts.allow_singular {
        return Err(Error::SingularJacobian { params: unidentifiable });
    }

    let scale = match opts.covariance {
        CovarianceScaling::ReducedChiSquare if dof > 0 => chi_square / dof as f64,
        CovarianceScaling::ReducedChiSquare => 0.0,
        CovarianceScaling::Absolute => 1.0,
    };
    let params = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let ci68 = if flagged[j] {
                f64::INFINITY
            } else {
                (inv[(j, j)] * scale).sqrt() / norms[j]
            };
            FitParam {
                name,
                value: x[j],
                ci68,
            }
        })
        .collect();
    Ok(FitReport {
        params,
        residual_rms: (chi_square / n as f64).sqrt(),
        chi_square,
        n_points: n,
        dof,
        converged: true,
        iterations,
        excluded_ranges: Vec::new(),
        unidentifiable,
        notes: Vec::new(),
    })
}
