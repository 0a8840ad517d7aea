//! Refractive index, wavenumber and group delay per crystal axis.

use std::f64::consts::PI;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};

use crate::crystal::{Axis, Crystal};
use crate::error::{Error, Result};
use crate::units::{omega_from_wavelength, wavelength_from_omega, C_UM_PER_PS};

/// Relative step in ω for the group-delay stencil.
pub const GD_RELATIVE_STEP: f64 = 1e-5;

bitflags! {
    /// Conditions that leave a dispersion value computable but suspect.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
    pub struct DispersionFlags: u8 {
        const OUTSIDE_TRANSPARENCY = 1;
        /// Temperature differs from the reference but the axis has no thermo-optic model.
        const NO_THERMO_MODEL = 1 << 1;
        /// The group-delay stencil crosses a transparency edge.
        const STENCIL_OUTSIDE = 1 << 2;
    }
}

impl DispersionFlags {
    pub fn describe(self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.contains(Self::OUTSIDE_TRANSPARENCY) {
            out.push("outside transparency window");
        }
        if self.contains(Self::NO_THERMO_MODEL) {
            out.push("no thermo-optic model");
        }
        if self.contains(Self::STENCIL_OUTSIDE) {
            out.push("derivative stencil crosses transparency edge");
        }
        out
    }
}

impl Crystal {
    /// Refractive index on `axis` at vacuum wavelength `l` (µm) and
    /// temperature `t` (°C).
    pub fn refractive_index(&self, axis: Axis, l: f64, t: f64) -> f64 {
        let mut n = self.sellmeier(axis).index(l);
        if let Some(thermo) = self.thermo_optic(axis) {
            n += thermo.correction(l, t).0 - thermo.correction(l, self.reference_temperature_c).0;
        }
        n
    }

    /// Closed-form dn/dλ (1/µm), including the thermo-optic term.
    pub fn index_derivative(&self, axis: Axis, l: f64, t: f64) -> f64 {
        let mut dn = self.sellmeier(axis).index_derivative(l);
        if let Some(thermo) = self.thermo_optic(axis) {
            dn += thermo.correction(l, t).1 - thermo.correction(l, self.reference_temperature_c).1;
        }
        dn
    }

    /// k = 2πn/λ in rad/µm.
    pub fn wavenumber(&self, axis: Axis, l: f64, t: f64) -> f64 {
        2.0 * PI * self.refractive_index(axis, l, t) / l
    }

    /// dk/dω in ps/mm. With k = nω/c, dk/dω = (n + ω dn/dω)/c, where
    /// dn/dω is a Richardson-extrapolated central difference in ω.
    pub fn group_delay(&self, axis: Axis, l: f64, t: f64) -> f64 {
        let omega = omega_from_wavelength(l);
        let n = |w: f64| self.refractive_index(axis, wavelength_from_omega(w), t);
        let h = GD_RELATIVE_STEP * omega;
        let central = |h: f64| {
            let (up, down) = (omega + h, omega - h);
            (n(up) - n(down)) / (up - down)
        };
        let coarse = central(h);
        let fine = central(0.5 * h);
        let dn_domega = (4.0 * fine - coarse) / 3.0;
        (self.refractive_index(axis, l, t) + omega * dn_domega) / C_UM_PER_PS * 1000.0
    }

    /// dk/dω in ps/mm from the closed-form index derivative.
    pub fn group_delay_analytic(&self, axis: Axis, l: f64, t: f64) -> f64 {
        let n = self.refractive_index(axis, l, t);
        let dn = self.index_derivative(axis, l, t);
        (n - l * dn) / C_UM_PER_PS * 1000.0
    }

    /// Flags for an index or wavenumber evaluation.
    pub fn dispersion_flags(&self, axis: Axis, l: f64, t: f64) -> DispersionFlags {
        let mut flags = DispersionFlags::empty();
        let (lo, hi) = self.transparency;
        if !(l >= lo && l <= hi) {
            flags |= DispersionFlags::OUTSIDE_TRANSPARENCY;
        }
        if self.thermo_optic(axis).is_none() && t != self.reference_temperature_c {
            flags |= DispersionFlags::NO_THERMO_MODEL;
        }
        flags
    }

    /// Flags for a group-delay evaluation, including the stencil check.
    pub fn group_delay_flags(&self, axis: Axis, l: f64, t: f64) -> DispersionFlags {
        let mut flags = self.dispersion_flags(axis, l, t);
        let omega = omega_from_wavelength(l);
        let h = GD_RELATIVE_STEP * omega;
        let (lo, hi) = self.transparency;
        let reach = [wavelength_from_omega(omega + h), wavelength_from_omega(omega - h)];
        if reach.iter().any(|&x| x < lo || x > hi) {
            flags |= DispersionFlags::STENCIL_OUTSIDE;
        }
        flags
    }
}

/// A single dispersion evaluation point.
#[derive(Debug, Clone, Copy)]
pub struct OpticalQuery<'a> {
    pub crystal: &'a Crystal,
    pub axis: Axis,
    pub wavelength_um: f64,
    pub temperature_c: f64,
}

impl<'a> OpticalQuery<'a> {
    pub fn new(crystal: &'a Crystal, axis: Axis, wavelength_um: f64, temperature_c: f64) -> Result<Self> {
        if !(wavelength_um > 0.0 && wavelength_um.is_finite()) {
            return Err(Error::Precondition(format!(
                "wavelength must be positive, got {wavelength_um}"
            )));
        }
        if !temperature_c.is_finite() {
            return Err(Error::Precondition("temperature is not finite".into()));
        }
        Ok(OpticalQuery {
            crystal,
            axis,
            wavelength_um,
            temperature_c,
        })
    }

    pub fn refractive_index(&self) -> f64 {
        self.crystal
            .refractive_index(self.axis, self.wavelength_um, self.temperature_c)
    }

    pub fn wavenumber(&self) -> f64 {
        self.crystal
            .wavenumber(self.axis, self.wavelength_um, self.temperature_c)
    }

    pub fn group_delay(&self) -> f64 {
        self.crystal
            .group_delay(self.axis, self.wavelength_um, self.temperature_c)
    }

    pub fn group_delay_analytic(&self) -> f64 {
        self.crystal
            .group_delay_analytic(self.axis, self.wavelength_um, self.temperature_c)
    }

    pub fn flags(&self) -> DispersionFlags {
        self.crystal
            .dispersion_flags(self.axis, self.wavelength_um, self.temperature_c)
    }

    pub fn group_delay_flags(&self) -> DispersionFlags {
        self.crystal
            .group_delay_flags(self.axis, self.wavelength_um, self.temperature_c)
    }
}
