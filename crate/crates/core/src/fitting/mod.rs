//! Least-squares engine and the spectrum, width, contrast and a(P) fits.

mod global;
mod grid;
mod lm;
mod report;
mod spectrum_fit;

pub use global::{
    a_name, fit_ap_curve, fit_ap_curve_with, global_contrast_fit, global_width_fit, ApFit, ContrastTarget,
    GlobalContrastFit, GlobalContrastOptions, GlobalWidthFit, GlobalWidthOptions, AP_NAMES, CONTRAST_NAMES,
    WIDTH_SCALAR_NAMES,
};
pub use grid::{GridRecord, MeasurementGrid};
pub use lm::{
    finite_difference_jacobian, jacobian_mismatch, least_squares, CovarianceScaling, LmOptions, ParamSpec,
    ResidualModel, Transform,
};
pub use report::{FitParam, FitReport};
pub use spectrum_fit::{
    fit_spectrum, fit_spectrum_with, initial_guess, initial_guess_with, model_from_report, ExclusionConfig,
    TripletResiduals, MIN_FIT_POINTS, PARAM_NAMES,
};
