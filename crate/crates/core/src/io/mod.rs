//! Text formats, seeded synthetic data and the Rabi calibration.

mod grid;
mod rabi;
mod report;
mod spectrum;
mod synth;
mod table;

pub use grid::{grid_from_text, grid_to_text, read_grid, write_grid, GRID_COLUMNS};
pub use rabi::{fit_rabi_calibration, RabiCalibration};
pub use report::{fit_report_from_text, fit_report_to_text, read_fit_report, write_fit_report, MACHINE_MARKER};
pub use spectrum::{read_spectrum, write_spectrum, Spectrum, SpectrumMeta};
pub use synth::{
    default_scan, synth_grid, synth_spectrum, GridNoise, SideResonance, NOISE_FREE_SIGMA, NOMINAL_REL_SIGMA,
    SYNTH_STEP_MHZ,
};
