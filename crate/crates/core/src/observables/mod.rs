//! Measurable quantities extracted from states and from the classical oracle.

mod density;
mod fidelity;
mod sampling;
mod scan;
mod spectral;

pub use density::{position_density, PositionDensity};
pub use fidelity::{
    distribution_fidelity, fidelity, garbage_error_probability, overlap, postselect_garbage_zero,
};
pub use sampling::{monte_carlo_spectral, required_samples, SampleSearch, SamplingMode, DEFAULT_SAMPLE_CAP};
pub use scan::{fit_scan, measure_echo, run_scan, write_scan_csv, EchoMeasurement, ScanFit, ScanGrid};
pub use spectral::{
    coarse_grain, coarse_grain_state, spectral_from_state, spectral_oracle, CoarseDistribution, SpectralDensity,
};

/// Floats in CSV output: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
