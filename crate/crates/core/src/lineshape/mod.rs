//! Ensemble lineshapes: inhomogeneous broadening, the hyperfine triplet, and
//! the surrogate width and contrast models used by the global fits.

mod contrast;
mod hyperfine;
mod inhomogeneous;
mod width_model;

pub use contrast::{contrast_argmax_power, contrast_model, ContrastModelParams};
pub use hyperfine::{triple_lorentzian, HyperfineModel};
pub use inhomogeneous::{
    convolve_inhomogeneous, ensemble_signal_at, DistKind, InhomogeneousDist, GAUSSIAN_FWHM_PER_SIGMA,
};
pub use width_model::{
    a_of_p, approx_total_width, nv_p1_rate, total_width_curvature, total_width_gradient, total_width_model,
    APModelParams, P1RateForm, WidthGradient, WidthModelParams,
};
