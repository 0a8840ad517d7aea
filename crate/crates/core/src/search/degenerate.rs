use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::optimize::{optimize_tau_l, Bounds, OptimizeSettings};
use crate::crystal::{Crystal, PolarizationConfig};
use crate::error::{Error, Result};
use crate::qpm::{first_order_grating, SpdcProcess};
use crate::roots::{bisect, scan_roots};
use crate::spectrum::{dispersion_parameter, SpectrumMode};

/// Bisection tolerance on the pump wavelength, µm (0.01 nm).
const GVM_TOLERANCE_UM: f64 = 1e-5;

/// Pump window for frequency-degenerate type-II downconversion: the pump
/// and its doubled wavelength must both lie in the transparency window.
pub fn degenerate_pump_window(crystal: &Crystal) -> (f64, f64) {
    let (lo, hi) = crystal.transparency;
    (lo, 0.5 * hi)
}

/// 2·GD_p − GD_s − GD_i at the degenerate point, ps/mm. Vanishes where
/// the pump group delay is the mean of the daughters' (D = 1).
pub fn degenerate_gvm_mismatch(crystal: &Crystal, pump_um: f64, temperature_c: f64) -> f64 {
    let pols = PolarizationConfig::TYPE_II;
    let d = 2.0 * pump_um;
    2.0 * crystal.group_delay(pols.pump, pump_um, temperature_c)
        - crystal.group_delay(pols.signal, d, temperature_c)
        - crystal.group_delay(pols.idler, d, temperature_c)
}

/// Pump wavelength (µm) at which degenerate type-II downconversion reaches
/// D = 1, located by bisection over the transparency-limited pump window.
pub fn degenerate_gvm_point(crystal: &Crystal, temperature_c: f64) -> Result<f64> {
    let (lo, hi) = degenerate_pump_window(crystal);
    let f = |p: f64| degenerate_gvm_mismatch(crystal, p, temperature_c);
    let roots = scan_roots(&f, lo, hi, 400, GVM_TOLERANCE_UM);
    let probe = 1e-4;
    let root = roots
        .into_iter()
        .find(|&r| f(r - probe) * f(r + probe) < 0.0)
        .ok_or(Error::NoGvmPoint)?;
    // Polish to the tolerance in case the root fell on a sample.
    Ok(bisect(
        &f,
        root - GVM_TOLERANCE_UM,
        root + GVM_TOLERANCE_UM,
        GVM_TOLERANCE_UM * 1e-3,
    )
    .unwrap_or(root))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateScanRow {
    pub pump_um: f64,
    pub dispersion_parameter: f64,
    pub tau_ps: f64,
    pub length_mm: f64,
    pub purity: f64,
    pub hom_visibility: f64,
    pub distinguishability: f64,
    pub bandwidth_ratio: f64,
}

/// Maximal purity and HOM visibility of frequency-degenerate type-II
/// downconversion at each pump wavelength.
pub fn degenerate_scan(
    crystal: &Arc<Crystal>,
    pump_um: &[f64],
    temperature_c: f64,
    bounds: &Bounds,
    settings: &OptimizeSettings,
) -> Result<Vec<DegenerateScanRow>> {
    let pols = PolarizationConfig::TYPE_II;
    pump_um
        .iter()
        .map(|&lp| {
            let ls = 2.0 * lp;
            let grating = first_order_grating(crystal, pols, lp, ls, temperature_c)?;
            let process = SpdcProcess::new(crystal.clone(), pols, lp, ls, temperature_c, grating, 10.0)?;
            let opt = optimize_tau_l(&process, bounds, SpectrumMode::Amplitude, settings)?;
            let r = &opt.report;
            let delta = r.distinguishability.unwrap_or(f64::NAN);
            Ok(DegenerateScanRow {
                pump_um: lp,
                dispersion_parameter: dispersion_parameter(crystal, pols, lp, ls, ls, temperature_c).canonical,
                tau_ps: opt.tau_ps,
                length_mm: opt.length_mm,
                purity: r.purity,
                hom_visibility: r.purity - delta,
                distinguishability: delta,
                bandwidth_ratio: r.bandwidth_ratio(),
            })
        })
        .collect()
}
