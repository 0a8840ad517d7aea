use serde::{Deserialize, Serialize};

use crate::crystal::{Crystal, PolarizationConfig};

/// Group-velocity-matching figure D and its two reciprocal branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionParameter {
    /// Branch with the smaller magnitude.
    pub canonical: f64,
    /// −(GD_p − GD_s)/(GD_p − GD_i).
    pub signal_branch: f64,
    /// −(GD_p − GD_i)/(GD_p − GD_s).
    pub idler_branch: f64,
}

impl DispersionParameter {
    pub fn from_delays(gd_pump: f64, gd_signal: f64, gd_idler: f64) -> Self {
        let a = gd_pump - gd_signal;
        let b = gd_pump - gd_idler;
        let signal_branch = -a / b;
        let idler_branch = -b / a;
        let canonical = if signal_branch.abs() <= idler_branch.abs() || idler_branch.is_nan() {
            signal_branch
        } else {
            idler_branch
        };
        DispersionParameter {
            canonical,
            signal_branch,
            idler_branch,
        }
    }
}

pub fn dispersion_parameter(
    crystal: &Crystal,
    pols: PolarizationConfig,
    pump_um: f64,
    signal_um: f64,
    idler_um: f64,
    temperature_c: f64,
) -> DispersionParameter {
    DispersionParameter::from_delays(
        crystal.group_delay(pols.pump, pump_um, temperature_c),
        crystal.group_delay(pols.signal, signal_um, temperature_c),
        crystal.group_delay(pols.idler, idler_um, temperature_c),
    )
}
