use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qpm::SpdcProcess;
use crate::spectrum::{build_jsa, schmidt_purity, GridSpec, PumpPulse, SchmidtReport, SpectrumMode, Window};

/// Search box for pulse duration (ps) and crystal length (mm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub tau_ps: (f64, f64),
    pub length_mm: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            tau_ps: (0.05, 50.0),
            length_mm: (0.5, 50.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeSettings {
    /// Log-spaced samples per axis in the coarse scan.
    pub coarse_steps: usize,
    /// Grid points per axis for objective evaluations.
    pub grid_points: usize,
    /// Grid points per axis for the final report.
    pub report_points: usize,
    /// Refinement stops when the step in ln τ and ln L falls below this.
    pub log_tolerance: f64,
}

impl Default for OptimizeSettings {
    fn default() -> Self {
        OptimizeSettings {
            coarse_steps: 24,
            grid_points: 48,
            report_points: 256,
            log_tolerance: 1e-3,
        }
    }
}

/// Best point found by [`maximize_log_box`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    /// The coarse scan saw a single value everywhere.
    pub flat: bool,
}

/// Maximizes `f` over the box by a log-spaced coarse scan followed by
/// compass refinement in log coordinates.
pub fn maximize_log_box(
    f: impl Fn(f64, f64) -> f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    steps: usize,
    log_tolerance: f64,
) -> Maximum {
    let steps = steps.max(2);
    let (lx0, lx1) = (x_range.0.ln(), x_range.1.ln());
    let (ly0, ly1) = (y_range.0.ln(), y_range.1.ln());
    let dx = (lx1 - lx0) / (steps - 1) as f64;
    let dy = (ly1 - ly0) / (steps - 1) as f64;
    let eval = |lx: f64, ly: f64| {
        let v = f(lx.exp(), ly.exp());
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let mut best = (lx0, ly0, f64::NEG_INFINITY);
    let mut lowest = f64::INFINITY;
    let mut highest = f64::NEG_INFINITY;
    for i in 0..steps {
        for j in 0..steps {
            let (lx, ly) = (lx0 + dx * i as f64, ly0 + dy * j as f64);
            let v = eval(lx, ly);
            lowest = lowest.min(v);
            highest = highest.max(v);
            if v > best.2 {
                best = (lx, ly, v);
            }
        }
    }
    let flat = highest - lowest <= 1e-12 * highest.abs().max(1.0);

    if !flat {
        let (mut sx, mut sy) = (dx, dy);
        while sx.max(sy) > log_tolerance {
            let mut moved = false;
            for (ex, ey) in [(sx, 0.0), (-sx, 0.0), (0.0, sy), (0.0, -sy)] {
                let lx = (best.0 + ex).clamp(lx0, lx1);
                let ly = (best.1 + ey).clamp(ly0, ly1);
                if (lx, ly) == (best.0, best.1) {
                    continue;
                }
                let v = eval(lx, ly);
                if v > best.2 {
                    best = (lx, ly, v);
                    moved = true;
                    break;
                }
            }
            if !moved {
                sx *= 0.5;
                sy *= 0.5;
            }
        }
    }
    Maximum {
        x: best.0.exp(),
        y: best.1.exp(),
        value: best.2,
        flat,
    }
}

/// Result of a pulse-duration / crystal-length optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauLOptimum {
    pub tau_ps: f64,
    pub length_mm: f64,
    /// Purity in the optimized mode at the optimizer's grid resolution.
    pub objective: f64,
    pub flat: bool,
    pub report: SchmidtReport,
}

/// Purity of `process` with crystal length `length_mm` pumped by a pulse of
/// duration `tau_ps`, evaluated on a `points`² grid.
pub fn purity_at(process: &SpdcProcess, tau_ps: f64, length_mm: f64, mode: SpectrumMode, points: usize) -> Result<f64> {
    let p = process.with_length(length_mm)?;
    let pump = PumpPulse::new(process.pump_um, tau_ps)?;
    let grid = GridSpec::square(points).with_window(Window::Auto {
        scale: 4.0,
        fit_axes: true,
    });
    let js = build_jsa(&p, &pump, &grid)?;
    Ok(schmidt_purity(&js, mode))
}

/// Finds the pulse duration and crystal length that maximize purity in the
/// given mode. Maximizing the intensity-mode purity minimizes K_JSI.
pub fn optimize_tau_l(
    process: &SpdcProcess,
    bounds: &Bounds,
    mode: SpectrumMode,
    settings: &OptimizeSettings,
) -> Result<TauLOptimum> {
    // Surface a phase-matching or window problem before scanning.
    purity_at(process, bounds.tau_ps.0, bounds.length_mm.0, mode, 4)?;
    let best = maximize_log_box(
        |tau, len| purity_at(process, tau, len, mode, settings.grid_points).unwrap_or(f64::NEG_INFINITY),
        bounds.tau_ps,
        bounds.length_mm,
        settings.coarse_steps,
        settings.log_tolerance,
    );
    let report = report_at(process, best.x, best.y, settings.report_points)?;
    Ok(TauLOptimum {
        tau_ps: best.x,
        length_mm: best.y,
        objective: best.value,
        flat: best.flat,
        report,
    })
}

/// Full report at a given pulse duration and crystal length.
pub fn report_at(process: &SpdcProcess, tau_ps: f64, length_mm: f64, points: usize) -> Result<SchmidtReport> {
    let p = process.with_length(length_mm)?;
    let pump = PumpPulse::new(process.pump_um, tau_ps)?;
    SchmidtReport::from_spectrum(&build_jsa(&p, &pump, &GridSpec::square(points))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_a_smooth_peak() {
        let f = |x: f64, y: f64| -((x.ln() - 1.0).powi(2) + (y.ln() + 0.5).powi(2));
        let m = maximize_log_box(f, (0.1, 100.0), (0.01, 10.0), 24, 1e-6);
        assert!((m.x.ln() - 1.0).abs() < 1e-5);
        assert!((m.y.ln() + 0.5).abs() < 1e-5);
        assert!(!m.flat);
    }

    #[test]
    fn constant_objective_is_flat() {
        let m = maximize_log_box(|_, _| 0.5, (1.0, 2.0), (1.0, 2.0), 24, 1e-3);
        assert!(m.flat);
        assert_eq!(m.value, 0.5);
    }
}
