use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::optimize::{optimize_tau_l, Bounds, OptimizeSettings};
use super::surrogate::min_schmidt_jsi;
use crate::crystal::{Crystal, PolarizationConfig};
use crate::error::Result;
use crate::qpm::{first_order_grating, signal_window, Grating, SpdcProcess, BULK_PERIOD_THRESHOLD_UM};
use crate::spectrum::SpectrumMode;
use crate::units::idler_wavelength;

/// The pure-state threshold on K_JSI.
pub const PURE_SCHMIDT_JSI: f64 = 1.01;

/// One contiguous signal interval achieving K_JSI ≤ 1.01 at a pump wavelength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasPoint {
    pub pump_um: f64,
    pub signal_lo_um: f64,
    pub signal_hi_um: f64,
    /// Poling period at each endpoint; `None` for a bulk-matched endpoint.
    pub period_lo_um: Option<f64>,
    pub period_hi_um: Option<f64>,
    /// Largest period inside the interval (infinite when it crosses the
    /// bulk locus).
    pub max_period_um: f64,
    /// Best configuration found inside the interval.
    pub best_signal_um: f64,
    pub tau_ps: f64,
    pub length_mm: f64,
    pub schmidt_number_jsi: f64,
    pub purity: f64,
}

impl AtlasPoint {
    pub fn reaches_bulk(&self) -> bool {
        self.max_period_um > BULK_PERIOD_THRESHOLD_UM
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtlasSettings {
    pub signal_samples: usize,
    pub bounds: Bounds,
    pub optimizer: OptimizeSettings,
    /// Bisection steps used to pull a failing endpoint inward.
    pub endpoint_steps: usize,
}

impl Default for AtlasSettings {
    fn default() -> Self {
        AtlasSettings {
            signal_samples: 2000,
            bounds: Bounds::default(),
            optimizer: OptimizeSettings {
                coarse_steps: 12,
                grid_points: 48,
                report_points: 48,
                log_tolerance: 1e-2,
            },
            endpoint_steps: 8,
        }
    }
}

/// Pump wavelengths from `start` to `stop` (µm) in steps of `step`.
pub fn pump_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + step * k as f64).collect()
}

struct Verified {
    schmidt_number_jsi: f64,
    purity: f64,
    tau_ps: f64,
    length_mm: f64,
}

fn verify(
    crystal: &Arc<Crystal>,
    pols: PolarizationConfig,
    pump_um: f64,
    signal_um: f64,
    temperature_c: f64,
    settings: &AtlasSettings,
) -> Option<Verified> {
    let grating = first_order_grating(crystal, pols, pump_um, signal_um, temperature_c).ok()?;
    let process = SpdcProcess::new(crystal.clone(), pols, pump_um, signal_um, temperature_c, grating, 10.0).ok()?;
    let opt = optimize_tau_l(&process, &settings.bounds, SpectrumMode::Intensity, &settings.optimizer).ok()?;
    let k = 1.0 / opt.objective;
    (k <= PURE_SCHMIDT_JSI).then_some(Verified {
        schmidt_number_jsi: k,
        purity: opt.report.purity,
        tau_ps: opt.tau_ps,
        length_mm: opt.length_mm,
    })
}

fn period(grating: Grating) -> Option<f64> {
    grating.period_um()
}

/// Signal intervals with K_JSI ≤ 1.01 for each pump wavelength.
///
/// Candidate intervals come from the linearized model; the best interior
/// sample and both endpoints are then re-checked with the full model,
/// pulling failing endpoints inward by bisection.
pub fn purity_atlas(
    crystal: &Arc<Crystal>,
    pols: PolarizationConfig,
    pump_um: &[f64],
    temperature_c: f64,
    settings: &AtlasSettings,
) -> Result<Vec<AtlasPoint>> {
    let mut out = Vec::new();
    let t = temperature_c;
    for &lp in pump_um {
        let Some((lo, hi)) = signal_window(crystal, lp) else {
            continue;
        };
        let n = settings.signal_samples.max(2);
        let signal: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let gd_p = crystal.group_delay(pols.pump, lp, t);
        let surrogate: Vec<f64> = signal
            .iter()
            .map(|&s| {
                let i = idler_wavelength(lp, s);
                let alpha = gd_p - crystal.group_delay(pols.signal, s, t);
                let beta = gd_p - crystal.group_delay(pols.idler, i, t);
                min_schmidt_jsi(alpha, beta)
            })
            .collect();

        let mut k = 0;
        while k < n {
            if surrogate[k] > PURE_SCHMIDT_JSI {
                k += 1;
                continue;
            }
            let start = k;
            while k < n && surrogate[k] <= PURE_SCHMIDT_JSI {
                k += 1;
            }
            let end = k - 1;
            if let Some(point) = verify_interval(crystal, pols, lp, &signal, &surrogate, start, end, t, settings) {
                out.push(point);
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn verify_interval(
    crystal: &Arc<Crystal>,
    pols: PolarizationConfig,
    lp: f64,
    signal: &[f64],
    surrogate: &[f64],
    start: usize,
    end: usize,
    t: f64,
    settings: &AtlasSettings,
) -> Option<AtlasPoint> {
    let best_idx = (start..=end).min_by(|&a, &b| surrogate[a].total_cmp(&surrogate[b]))?;
    let best = verify(crystal, pols, lp, signal[best_idx], t, settings)?;

    // Outermost passing index between `inner` (passes) and `outer`.
    let pull_in = |inner: usize, outer: usize| -> usize {
        if verify(crystal, pols, lp, signal[outer], t, settings).is_some() {
            return outer;
        }
        let (mut pass, mut fail) = (inner, outer);
        for _ in 0..settings.endpoint_steps {
            if pass.abs_diff(fail) <= 1 {
                break;
            }
            let mid = (pass + fail) / 2;
            if verify(crystal, pols, lp, signal[mid], t, settings).is_some() {
                pass = mid;
            } else {
                fail = mid;
            }
        }
        pass
    };
    let lo_idx = pull_in(best_idx, start);
    let hi_idx = pull_in(best_idx, end);

    let grating_at = |s: f64| first_order_grating(crystal, pols, lp, s, t).ok();
    let max_period_um = (lo_idx..=hi_idx)
        .filter_map(|i| grating_at(signal[i]))
        .map(|g| period(g).unwrap_or(f64::INFINITY))
        .chain(crosses_bulk(crystal, pols, lp, signal, lo_idx, hi_idx, t).then_some(f64::INFINITY))
        .fold(0.0, f64::max);

    Some(AtlasPoint {
        pump_um: lp,
        signal_lo_um: signal[lo_idx],
        signal_hi_um: signal[hi_idx],
        period_lo_um: grating_at(signal[lo_idx]).and_then(period),
        period_hi_um: grating_at(signal[hi_idx]).and_then(period),
        max_period_um,
        best_signal_um: signal[best_idx],
        tau_ps: best.tau_ps,
        length_mm: best.length_mm,
        schmidt_number_jsi: best.schmidt_number_jsi,
        purity: best.purity,
    })
}

/// Whether k_p − k_s − k_i changes sign inside the interval.
fn crosses_bulk(
    crystal: &Crystal,
    pols: PolarizationConfig,
    lp: f64,
    signal: &[f64],
    lo: usize,
    hi: usize,
    t: f64,
) -> bool {
    let dk = |s: f64| crate::qpm::bare_mismatch(crystal, pols, lp, s, idler_wavelength(lp, s), t);
    let first = dk(signal[lo]).signum();
    (lo..=hi).any(|i| dk(signal[i]).signum() != first)
}
