//! Joint spectral amplitudes and the figures of merit derived from them.

mod filter;
mod gvm;
mod marginal;
mod schmidt;

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionFlags;
use crate::error::{Error, Result};
use crate::qpm::{qpm_amplitude, SpdcProcess};
use crate::units::{
    fwhm_per_sigma, omega_from_wavelength, omega_interval_to_wavelength, pump_wavelength, GAUSSIAN_TBP,
};

pub use filter::apply_bandpass;
pub use gvm::{dispersion_parameter, DispersionParameter};
pub use marginal::{fwhm, Marginals};
pub use schmidt::{
    delay_optimized_overlap, distinguishability, hom_visibility_bound, schmidt_decompose, schmidt_purity,
    Distinguishability, ReducedState, SchmidtDecomposition, SchmidtReport,
};

pub type C64 = Complex<f64>;

/// Transform-limited Gaussian pump pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpPulse {
    pub center_um: f64,
    /// Intensity FWHM duration, ps.
    pub duration_ps: f64,
}

impl PumpPulse {
    pub fn new(center_um: f64, duration_ps: f64) -> Result<Self> {
        if !(center_um > 0.0 && center_um.is_finite()) {
            return Err(Error::Validation(format!(
                "pump.center_um: must be positive, got {center_um}"
            )));
        }
        if !(duration_ps > 0.0 && duration_ps.is_finite()) {
            return Err(Error::Validation(format!(
                "pump.duration_ps: must be positive, got {duration_ps}"
            )));
        }
        Ok(PumpPulse { center_um, duration_ps })
    }

    /// Intensity FWHM in ordinary frequency, THz.
    pub fn bandwidth_thz(&self) -> f64 {
        GAUSSIAN_TBP / self.duration_ps
    }

    /// Intensity FWHM in angular frequency, rad/ps.
    pub fn fwhm_omega(&self) -> f64 {
        2.0 * PI * self.bandwidth_thz()
    }

    /// Standard deviation of the spectral intensity, rad/ps.
    pub fn sigma_omega(&self) -> f64 {
        self.fwhm_omega() / fwhm_per_sigma()
    }

    pub fn center_omega(&self) -> f64 {
        omega_from_wavelength(self.center_um)
    }

    /// Pump amplitude at total daughter frequency `omega_sum` (rad/ps).
    pub fn amplitude(&self, omega_sum: f64) -> C64 {
        let s = self.sigma_omega();
        let d = omega_sum - self.center_omega();
        C64::new((-d * d / (4.0 * s * s)).exp(), 0.0)
    }
}

/// Which wavelength window the grid spans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// Half-width `scale` times the larger of the pump and phase-matching
    /// bandwidths, centred on the nominal pair. With `fit_axes` the
    /// narrower axis is shrunk to the extent of the spectrum along it;
    /// otherwise both axes span the same frequency interval.
    Auto { scale: f64, fit_axes: bool },
    /// Explicit bounds in µm.
    Explicit {
        signal_um: (f64, f64),
        idler_um: (f64, f64),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub signal_points: usize,
    pub idler_points: usize,
    pub window: Window,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::square(512)
    }
}

impl GridSpec {
    pub fn square(points: usize) -> Self {
        GridSpec {
            signal_points: points,
            idler_points: points,
            window: Window::Auto {
                scale: 4.0,
                fit_axes: false,
            },
        }
    }

    pub fn with_window(self, window: Window) -> Self {
        GridSpec { window, ..self }
    }

    /// Signal and idler axes for `process` pumped by `pump`.
    pub fn axes(&self, process: &SpdcProcess, pump: &PumpPulse) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.signal_points < 2 || self.idler_points < 2 {
            return Err(Error::Validation("grid: need at least 2 points per axis".into()));
        }
        let ((s0, s1), (i0, i1)) = match self.window {
            Window::Explicit { signal_um, idler_um } => (signal_um, idler_um),
            Window::Auto { scale, fit_axes } => {
                if !(scale > 0.0) {
                    return Err(Error::Validation("grid.window.scale: must be positive".into()));
                }
                let half = scale * natural_bandwidth(process, pump);
                let (ws, wi) = if fit_axes {
                    axis_weights(process, pump)
                } else {
                    (1.0, 1.0)
                };
                let hs = omega_interval_to_wavelength(process.signal_um, half * ws);
                let hi = omega_interval_to_wavelength(process.idler_um, half * wi);
                (
                    (process.signal_um - hs, process.signal_um + hs),
                    (process.idler_um - hi, process.idler_um + hi),
                )
            }
        };
        if !(s0 > 0.0 && s1 > s0 && i0 > 0.0 && i1 > i0) {
            return Err(Error::Validation(format!(
                "grid.window: invalid bounds signal [{s0}, {s1}], idler [{i0}, {i1}]"
            )));
        }
        Ok((
            linspace(s0, s1, self.signal_points),
            linspace(i0, i1, self.idler_points),
        ))
    }
}

/// Larger of the pump FWHM and the phase-matching bandwidth (first sinc
/// zero along the faster-walking daughter), rad/ps.
pub fn natural_bandwidth(process: &SpdcProcess, pump: &PumpPulse) -> f64 {
    let c = &process.crystal;
    let t = process.temperature_c;
    let gd_p = c.group_delay(process.pols.pump, process.pump_um, t);
    let gd_s = c.group_delay(process.pols.signal, process.signal_um, t);
    let gd_i = c.group_delay(process.pols.idler, process.idler_um, t);
    let walk = (gd_p - gd_s).abs().max((gd_p - gd_i).abs()).max(1e-9) / 1000.0;
    let pm = 2.0 * PI / (process.length_mm * 1000.0 * walk);
    pump.fwhm_omega().max(pm)
}

/// Relative extent of the signal and idler axes, the larger scaled to one.
/// From the linearized constraints |δ_s + δ_i| ≤ Δω_pump and
/// |α δ_s + β δ_i| ≤ 2π/L; equal when the two constraints are nearly
/// parallel.
fn axis_weights(process: &SpdcProcess, pump: &PumpPulse) -> (f64, f64) {
    let c = &process.crystal;
    let t = process.temperature_c;
    let gd_p = c.group_delay(process.pols.pump, process.pump_um, t);
    let alpha = (gd_p - c.group_delay(process.pols.signal, process.signal_um, t)) / 1000.0;
    let beta = (gd_p - c.group_delay(process.pols.idler, process.idler_um, t)) / 1000.0;
    let a = pump.fwhm_omega();
    let b = 2.0 * PI / (process.length_mm * 1000.0);
    let skew = (beta - alpha).abs();
    if skew < 1e-3 * alpha.abs().max(beta.abs()) {
        return (1.0, 1.0);
    }
    let es = (beta.abs() * a + b) / skew;
    let ei = (alpha.abs() * a + b) / skew;
    let top = es.max(ei);
    (es / top, ei / top)
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { b } else { a + step * k as f64 })
        .collect()
}

/// Which factor of the joint amplitude to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JsaComponent {
    /// Pump envelope times phase matching.
    Full,
    PumpEnvelope,
    PhaseMatching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMode {
    Amplitude,
    Intensity,
}

/// Normalized complex amplitude on a uniform (λ_s, λ_i) grid. Rows follow
/// the signal axis.
#[derive(Debug, Clone)]
pub struct JointSpectrum {
    amplitudes: DMatrix<C64>,
    signal_um: Vec<f64>,
    idler_um: Vec<f64>,
    process: Option<SpdcProcess>,
    pump: Option<PumpPulse>,
    flags: DispersionFlags,
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::Validation(format!("{name} axis: need at least 2 samples")));
    }
    let step = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::Validation(format!("{name} axis: not increasing")));
    }
    for w in axis.windows(2) {
        let d = w[1] - w[0];
        if !(d > 0.0) || ((d - step) / step).abs() > 1e-6 {
            return Err(Error::Validation(format!(
                "{name} axis: samples must be strictly increasing and uniform"
            )));
        }
    }
    Ok(())
}

impl JointSpectrum {
    /// Samples `f(λ_s, λ_i)` on the given axes and normalizes.
    pub fn from_fn(signal_um: Vec<f64>, idler_um: Vec<f64>, f: impl Fn(f64, f64) -> C64) -> Result<Self> {
        check_axis("signal", &signal_um)?;
        check_axis("idler", &idler_um)?;
        let amplitudes = DMatrix::from_fn(signal_um.len(), idler_um.len(), |r, c| f(signal_um[r], idler_um[c]));
        Self::from_matrix(amplitudes, signal_um, idler_um)
    }

    /// Wraps an amplitude matrix, normalizing it to unit total intensity.
    pub fn from_matrix(amplitudes: DMatrix<C64>, signal_um: Vec<f64>, idler_um: Vec<f64>) -> Result<Self> {
        check_axis("signal", &signal_um)?;
        check_axis("idler", &idler_um)?;
        if amplitudes.nrows() != signal_um.len() || amplitudes.ncols() != idler_um.len() {
            return Err(Error::Validation(format!(
                "grid shape {}x{} does not match axes {}x{}",
                amplitudes.nrows(),
                amplitudes.ncols(),
                signal_um.len(),
                idler_um.len()
            )));
        }
        let mut js = JointSpectrum {
            amplitudes,
            signal_um,
            idler_um,
            process: None,
            pump: None,
            flags: DispersionFlags::empty(),
        };
        js.normalize()?;
        Ok(js)
    }

    fn normalize(&mut self) -> Result<()> {
        if self.amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        self.amplitudes.unscale_mut(norm);
        Ok(())
    }

    pub fn amplitudes(&self) -> &DMatrix<C64> {
        &self.amplitudes
    }

    pub fn signal_axis(&self) -> &[f64] {
        &self.signal_um
    }

    pub fn idler_axis(&self) -> &[f64] {
        &self.idler_um
    }

    pub fn process(&self) -> Option<&SpdcProcess> {
        self.process.as_ref()
    }

    pub fn pump(&self) -> Option<&PumpPulse> {
        self.pump.as_ref()
    }

    pub fn flags(&self) -> DispersionFlags {
        self.flags
    }

    /// Sample spacing of each axis, µm.
    pub fn spacing_um(&self) -> (f64, f64) {
        let s = &self.signal_um;
        let i = &self.idler_um;
        (
            (s[s.len() - 1] - s[0]) / (s.len() - 1) as f64,
            (i[i.len() - 1] - i[0]) / (i.len() - 1) as f64,
        )
    }

    /// |JSA|², summing to one.
    pub fn intensity(&self) -> DMatrix<f64> {
        self.amplitudes.map(|z| z.norm_sqr())
    }

    /// Whether signal and idler share the same wavelength axis.
    pub fn axes_match(&self) -> bool {
        self.signal_um.len() == self.idler_um.len()
            && self
                .signal_um
                .iter()
                .zip(&self.idler_um)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs())
    }

    /// Signal and idler exchanged.
    pub fn transposed(&self) -> JointSpectrum {
        JointSpectrum {
            amplitudes: self.amplitudes.transpose(),
            signal_um: self.idler_um.clone(),
            idler_um: self.signal_um.clone(),
            process: self.process.as_ref().map(SpdcProcess::swapped),
            pump: self.pump,
            flags: self.flags,
        }
    }

    /// Copy with the amplitude multiplied pointwise by `f(row, col)` and
    /// renormalized. Returns the copy and the retained intensity fraction.
    pub(crate) fn reweighted(&self, f: impl Fn(usize, usize) -> f64) -> Result<(JointSpectrum, f64)> {
        let mut out = self.clone();
        for c in 0..out.amplitudes.ncols() {
            for r in 0..out.amplitudes.nrows() {
                out.amplitudes[(r, c)] *= f(r, c);
            }
        }
        let kept: f64 = out.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        out.normalize()?;
        Ok((out, kept))
    }
}

/// Builds the normalized joint spectral amplitude of `process` pumped by
/// `pump`. The process must be phase-matched at the grid centre.
pub fn build_jsa(process: &SpdcProcess, pump: &PumpPulse, grid: &GridSpec) -> Result<JointSpectrum> {
    let x = 0.5 * process.phase_mismatch() * process.length_mm * 1000.0;
    if x.abs() > 1e-3 {
        return Err(Error::NotPhaseMatched(x.abs()));
    }
    build_component(process, pump, grid, JsaComponent::Full)
}

/// Builds one factor of the joint amplitude without the phase-matching
/// precondition.
pub fn build_component(
    process: &SpdcProcess,
    pump: &PumpPulse,
    grid: &GridSpec,
    component: JsaComponent,
) -> Result<JointSpectrum> {
    let (signal_um, idler_um) = grid.axes(process, pump)?;
    let c = &process.crystal;
    let t = process.temperature_c;
    let pols = process.pols;
    let kg = process.grating.wavevector();
    let ks: Vec<f64> = signal_um.iter().map(|&l| c.wavenumber(pols.signal, l, t)).collect();
    let ki: Vec<f64> = idler_um.iter().map(|&l| c.wavenumber(pols.idler, l, t)).collect();
    let ws: Vec<f64> = signal_um.iter().map(|&l| omega_from_wavelength(l)).collect();
    let wi: Vec<f64> = idler_um.iter().map(|&l| omega_from_wavelength(l)).collect();
    let amplitudes = DMatrix::from_fn(signal_um.len(), idler_um.len(), |r, col| {
        let mu = || pump.amplitude(ws[r] + wi[col]);
        let psi = || {
            let lp = pump_wavelength(signal_um[r], idler_um[col]);
            let dk = c.wavenumber(pols.pump, lp, t) - ks[r] - ki[col] - kg;
            qpm_amplitude(dk, process.length_mm)
        };
        match component {
            JsaComponent::Full => mu() * psi(),
            JsaComponent::PumpEnvelope => mu(),
            JsaComponent::PhaseMatching => psi(),
        }
    });
    let mut js = JointSpectrum::from_matrix(amplitudes, signal_um, idler_um)?;
    let edge = |axis: crate::crystal::Axis, v: &[f64]| {
        c.dispersion_flags(axis, v[0], t) | c.dispersion_flags(axis, v[v.len() - 1], t)
    };
    let pump_lo = pump_wavelength(js.signal_um[0], js.idler_um[0]);
    let pump_hi = pump_wavelength(js.signal_um[js.signal_um.len() - 1], js.idler_um[js.idler_um.len() - 1]);
    js.flags = edge(pols.signal, &js.signal_um)
        | edge(pols.idler, &js.idler_um)
        | c.dispersion_flags(pols.pump, pump_lo, t)
        | c.dispersion_flags(pols.pump, pump_hi, t);
    js.process = Some(process.clone());
    js.pump = Some(*pump);
    Ok(js)
}
