//! Phase mismatch and the quasi-phase-matching solvers.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::crystal::{Crystal, PolarizationConfig};
use crate::dispersion::DispersionFlags;
use crate::error::{Error, Result};
use crate::roots::scan_roots;
use crate::units::{energy_residual, idler_wavelength};

/// Poling periods above this (µm) are treated as bulk candidates.
pub const BULK_PERIOD_THRESHOLD_UM: f64 = 1e5;

/// Samples in the signal-wavelength root scan.
pub const SIGNAL_SCAN_SAMPLES: usize = 2000;

/// Residual above which a bracketed sign change is taken to be a pole.
const ROOT_ACCEPT_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grating {
    /// Uniform poling with period `period_um` used at odd order `order`.
    Period { period_um: f64, order: i32 },
    /// No grating.
    Bulk,
}

impl Grating {
    /// Grating wavevector 2πm/Λ in rad/µm; zero for bulk.
    pub fn wavevector(&self) -> f64 {
        match *self {
            Grating::Period { period_um, order } => 2.0 * PI * order as f64 / period_um,
            Grating::Bulk => 0.0,
        }
    }

    pub fn period_um(&self) -> Option<f64> {
        match *self {
            Grating::Period { period_um, .. } => Some(period_um),
            Grating::Bulk => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Grating::Period { period_um, order } = *self {
            if order % 2 == 0 {
                return Err(Error::Validation(format!(
                    "grating.order: QPM order must be odd, got {order}"
                )));
            }
            if !(period_um > 0.0 && period_um.is_finite()) {
                return Err(Error::Validation(format!(
                    "grating.period_um: must be positive, got {period_um}"
                )));
            }
        }
        Ok(())
    }
}

/// k_p − k_s − k_i without any grating term, rad/µm.
pub fn bare_mismatch(
    crystal: &Crystal,
    pols: PolarizationConfig,
    pump_um: f64,
    signal_um: f64,
    idler_um: f64,
    temperature_c: f64,
) -> f64 {
    crystal.wavenumber(pols.pump, pump_um, temperature_c)
        - crystal.wavenumber(pols.signal, signal_um, temperature_c)
        - crystal.wavenumber(pols.idler, idler_um, temperature_c)
}

/// A fully specified collinear SPDC process.
#[derive(Debug, Clone)]
pub struct SpdcProcess {
    pub crystal: Arc<Crystal>,
    pub pols: PolarizationConfig,
    pub pump_um: f64,
    pub signal_um: f64,
    pub idler_um: f64,
    pub temperature_c: f64,
    pub grating: Grating,
    pub length_mm: f64,
}

impl SpdcProcess {
    /// Builds a process, deriving the idler from energy conservation.
    pub fn new(
        crystal: Arc<Crystal>,
        pols: PolarizationConfig,
        pump_um: f64,
        signal_um: f64,
        temperature_c: f64,
        grating: Grating,
        length_mm: f64,
    ) -> Result<Self> {
        if !(signal_um > pump_um) {
            return Err(Error::Validation(format!(
                "signal wavelength {signal_um} µm must exceed pump wavelength {pump_um} µm"
            )));
        }
        let idler_um = idler_wavelength(pump_um, signal_um);
        Self::from_triple(
            crystal,
            pols,
            [pump_um, signal_um, idler_um],
            temperature_c,
            grating,
            length_mm,
        )
    }

    /// Builds a process from an explicit wavelength triple, checking energy
    /// conservation.
    pub fn from_triple(
        crystal: Arc<Crystal>,
        pols: PolarizationConfig,
        [pump_um, signal_um, idler_um]: [f64; 3],
        temperature_c: f64,
        grating: Grating,
        length_mm: f64,
    ) -> Result<Self> {
        for (field, v) in [("pump", pump_um), ("signal", signal_um), ("idler", idler_um)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{field}_um: must be positive, got {v}")));
            }
        }
        if energy_residual(pump_um, signal_um, idler_um) > 1e-12 {
            return Err(Error::Validation(format!(
                "wavelengths {pump_um}, {signal_um}, {idler_um} µm violate energy conservation"
            )));
        }
        if !(length_mm > 0.0 && length_mm.is_finite()) {
            return Err(Error::Validation(format!(
                "length_mm: must be positive, got {length_mm}"
            )));
        }
        if !temperature_c.is_finite() {
            return Err(Error::Validation("temperature_c: not finite".into()));
        }
        grating.validate()?;
        Ok(SpdcProcess {
            crystal,
            pols,
            pump_um,
            signal_um,
            idler_um,
            temperature_c,
            grating,
            length_mm,
        })
    }

    /// Δk_m at the nominal wavelengths, rad/µm.
    pub fn phase_mismatch(&self) -> f64 {
        self.phase_mismatch_at(self.pump_um, self.signal_um, self.idler_um)
    }

    /// Δk_m for arbitrary wavelengths with this process's crystal,
    /// polarizations, temperature and grating.
    pub fn phase_mismatch_at(&self, pump_um: f64, signal_um: f64, idler_um: f64) -> f64 {
        bare_mismatch(
            &self.crystal,
            self.pols,
            pump_um,
            signal_um,
            idler_um,
            self.temperature_c,
        ) - self.grating.wavevector()
    }

    /// Dispersion flags of the three nominal wavelengths.
    pub fn flags(&self) -> DispersionFlags {
        let t = self.temperature_c;
        self.crystal.dispersion_flags(self.pols.pump, self.pump_um, t)
            | self.crystal.dispersion_flags(self.pols.signal, self.signal_um, t)
            | self.crystal.dispersion_flags(self.pols.idler, self.idler_um, t)
    }

    pub fn with_grating(&self, grating: Grating) -> Result<Self> {
        grating.validate()?;
        Ok(SpdcProcess {
            grating,
            ..self.clone()
        })
    }

    pub fn with_length(&self, length_mm: f64) -> Result<Self> {
        if !(length_mm > 0.0 && length_mm.is_finite()) {
            return Err(Error::Validation(format!(
                "length_mm: must be positive, got {length_mm}"
            )));
        }
        Ok(SpdcProcess {
            length_mm,
            ..self.clone()
        })
    }

    /// Same process with signal and idler roles exchanged.
    pub fn swapped(&self) -> Self {
        SpdcProcess {
            pols: self.pols.swapped(),
            signal_um: self.idler_um,
            idler_um: self.signal_um,
            ..self.clone()
        }
    }
}

/// Poling period Λ = 2πm/(k_p − k_s − k_i) for the given order.
pub fn solve_poling_period(
    crystal: &Crystal,
    pols: PolarizationConfig,
    pump_um: f64,
    signal_um: f64,
    temperature_c: f64,
    order: i32,
) -> Result<f64> {
    if order % 2 == 0 {
        return Err(Error::Validation(format!("QPM order must be odd, got {order}")));
    }
    let idler_um = idler_wavelength(pump_um, signal_um);
    let dk = bare_mismatch(crystal, pols, pump_um, signal_um, idler_um, temperature_c);
    if dk == 0.0 {
        return Err(Error::BulkPhaseMatched);
    }
    if dk.signum() != (order as f64).signum() {
        return Err(Error::NoGratingOfThisOrder { order });
    }
    Ok(2.0 * PI * order as f64 / dk)
}

/// First-order grating for the given wavelengths, with the order sign
/// chosen so the period is positive.
pub fn first_order_grating(
    crystal: &Crystal,
    pols: PolarizationConfig,
    pump_um: f64,
    signal_um: f64,
    temperature_c: f64,
) -> Result<Grating> {
    let idler_um = idler_wavelength(pump_um, signal_um);
    let dk = bare_mismatch(crystal, pols, pump_um, signal_um, idler_um, temperature_c);
    if dk == 0.0 {
        return Ok(Grating::Bulk);
    }
    let order = if dk > 0.0 { 1 } else { -1 };
    let period_um = solve_poling_period(crystal, pols, pump_um, signal_um, temperature_c, order)?;
    Ok(Grating::Period { period_um, order })
}

/// Signal window in which both daughters lie inside the transparency range.
pub fn signal_window(crystal: &Crystal, pump_um: f64) -> Option<(f64, f64)> {
    let (lo, hi) = crystal.transparency;
    if !(pump_um > lo && 1.0 / pump_um > 1.0 / hi) {
        return None;
    }
    let lower = lo.max(1.0 / (1.0 / pump_um - 1.0 / hi));
    (lower < hi).then_some((lower, hi))
}

/// All signal wavelengths in the transparency-limited window at which the
/// process with grating `grating` is phase-matched.
pub fn solve_signal_wavelengths(
    crystal: &Crystal,
    pols: PolarizationConfig,
    pump_um: f64,
    grating: Grating,
    temperature_c: f64,
) -> Vec<f64> {
    let Some((lo, hi)) = signal_window(crystal, pump_um) else {
        return Vec::new();
    };
    let kg = grating.wavevector();
    let f = |s: f64| bare_mismatch(crystal, pols, pump_um, s, idler_wavelength(pump_um, s), temperature_c) - kg;
    scan_roots(&f, lo, hi, SIGNAL_SCAN_SAMPLES, 0.0)
        .into_iter()
        .filter(|&s| f(s).abs() < ROOT_ACCEPT_RESIDUAL)
        .collect()
}

/// QPM amplitude exp(iΔk L/2)·sinc(Δk L/2) for Δk in rad/µm and L in mm.
pub fn qpm_amplitude(delta_k: f64, length_mm: f64) -> Complex<f64> {
    let x = 0.5 * delta_k * length_mm * 1000.0;
    Complex::from_polar(sinc(x), x)
}

/// Unnormalized sinc, sin(x)/x.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Bulk phase-matching locus: every (λ_p, λ_s) pair with k_p = k_s + k_i.
pub fn bulk_phasematch_locus(
    crystal: &Crystal,
    pols: PolarizationConfig,
    pump_um: &[f64],
    temperature_c: f64,
) -> Vec<(f64, f64)> {
    pump_um
        .iter()
        .flat_map(|&p| {
            solve_signal_wavelengths(crystal, pols, p, Grating::Bulk, temperature_c)
                .into_iter()
                .map(move |s| (p, s))
        })
        .collect()
}
