//! Physical constants and unit conversions used across the crate.

use std::f64::consts::PI;

/// Speed of light in vacuum, µm/ps.
pub const C_UM_PER_PS: f64 = 299.792_458;

/// Time-bandwidth product of a transform-limited Gaussian pulse
/// (intensity FWHM in frequency times intensity FWHM in time).
pub const GAUSSIAN_TBP: f64 = 0.441;

/// Ratio between the FWHM and the standard deviation of a Gaussian.
pub fn fwhm_per_sigma() -> f64 {
    2.0 * (2.0 * std::f64::consts::LN_2).sqrt()
}

/// Angular frequency (rad/ps) of a vacuum wavelength (µm).
pub fn omega_from_wavelength(wavelength_um: f64) -> f64 {
    2.0 * PI * C_UM_PER_PS / wavelength_um
}

/// Vacuum wavelength (µm) of an angular frequency (rad/ps).
pub fn wavelength_from_omega(omega: f64) -> f64 {
    2.0 * PI * C_UM_PER_PS / omega
}

/// Idler wavelength fixed by energy conservation, 1/λp = 1/λs + 1/λi.
pub fn idler_wavelength(pump_um: f64, signal_um: f64) -> f64 {
    1.0 / (1.0 / pump_um - 1.0 / signal_um)
}

/// Pump wavelength for a given daughter pair.
pub fn pump_wavelength(signal_um: f64, idler_um: f64) -> f64 {
    1.0 / (1.0 / signal_um + 1.0 / idler_um)
}

/// Converts a small frequency interval (rad/ps) around `wavelength_um` into
/// a wavelength interval (µm).
pub fn omega_interval_to_wavelength(wavelength_um: f64, d_omega: f64) -> f64 {
    wavelength_um * wavelength_um * d_omega / (2.0 * PI * C_UM_PER_PS)
}

/// Relative energy-conservation residual of a wavelength triple.
pub fn energy_residual(pump_um: f64, signal_um: f64, idler_um: f64) -> f64 {
    let lhs = 1.0 / pump_um;
    ((lhs - 1.0 / signal_um - 1.0 / idler_um) / lhs).abs()
}
