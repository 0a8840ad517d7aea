//! Collinear double downconversion: two type-II processes sharing one
//! grating through orders m = ±1, with the polarizations of the short (blue)
//! and long (red) daughters exchanged between them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::degenerate::degenerate_pump_window;
use crate::crystal::{Crystal, PolarizationConfig};
use crate::error::{Error, Result};
use crate::qpm::bare_mismatch;
use crate::roots::scan_roots;
use crate::units::{idler_wavelength, omega_interval_to_wavelength};

/// ΔωL|ΔGD| at the half-maximum points of sinc²(ΔkL/2).
const SINC2_FWHM_PRODUCT: f64 = 5.566;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CddcSettings {
    pub period_range_um: (f64, f64),
    pub period_samples: usize,
    pub pump_samples: usize,
    pub blue_samples: usize,
    /// Crystal length used for the bandwidth estimates, mm.
    pub length_mm: f64,
    pub jacobian_step_um: f64,
    pub max_iterations: usize,
    /// Convergence threshold on both phase-matching residuals, rad/µm.
    pub tolerance: f64,
}

impl Default for CddcSettings {
    fn default() -> Self {
        CddcSettings {
            period_range_um: (5.0, 2000.0),
            period_samples: 200,
            pump_samples: 400,
            blue_samples: 400,
            length_mm: 10.0,
            jacobian_step_um: 1e-4,
            max_iterations: 50,
            tolerance: 1e-10,
        }
    }
}

/// One simultaneous phase-matching configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CddcConfig {
    /// Index of the solution branch in the pump/blue plane.
    pub branch: usize,
    pub period_um: f64,
    pub pump_um: f64,
    pub blue_um: f64,
    pub red_um: f64,
    /// Order the first process (blue on the signal axis) uses.
    pub order_first: i32,
    /// Continuous-wave signal bandwidth of each process at the configured length, nm.
    pub blue_bandwidth_first_nm: f64,
    pub blue_bandwidth_second_nm: f64,
    /// |GD(blue) − GD(red)| for the first process's polarizations, ps/mm.
    pub delta_gd_first: f64,
    /// Same for the second process.
    pub delta_gd_second: f64,
    /// |GD(blue) − GD(red)| with both on the signal axis, then both on the idler axis.
    pub delta_gd_signal_axis: f64,
    pub delta_gd_idler_axis: f64,
    /// Δk of each process including its grating term, rad/µm.
    pub residual_first: f64,
    pub residual_second: f64,
    /// |Δk₁ + Δk₂| / (|Δk₁| + |Δk₂|) without grating terms.
    pub relative_sum_residual: f64,
}

struct Pair<'a> {
    crystal: &'a Crystal,
    pols: PolarizationConfig,
    t: f64,
}

impl Pair<'_> {
    fn first(&self, pump: f64, blue: f64) -> f64 {
        bare_mismatch(
            self.crystal,
            self.pols,
            pump,
            blue,
            idler_wavelength(pump, blue),
            self.t,
        )
    }

    fn second(&self, pump: f64, blue: f64) -> f64 {
        bare_mismatch(
            self.crystal,
            self.pols.swapped(),
            pump,
            blue,
            idler_wavelength(pump, blue),
            self.t,
        )
    }

    fn sum(&self, pump: f64, blue: f64) -> f64 {
        self.first(pump, blue) + self.second(pump, blue)
    }

    fn blue_window(&self, pump: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.crystal.transparency;
        let lower = lo.max(1.0 / (1.0 / pump - 1.0 / hi)).max(pump * (1.0 + 1e-9));
        let upper = 2.0 * pump * (1.0 - 1e-9);
        (lower < upper).then_some((lower, upper))
    }

    fn config(&self, branch: usize, pump: f64, blue: f64, settings: &CddcSettings) -> CddcConfig {
        let red = idler_wavelength(pump, blue);
        let d1 = self.first(pump, blue);
        let d2 = self.second(pump, blue);
        let kg = 0.5 * (d1 - d2);
        let order_first = if kg >= 0.0 { 1 } else { -1 };
        let period_um = 2.0 * PI / kg.abs();
        let (c, t, a, b) = (self.crystal, self.t, self.pols.signal, self.pols.idler);
        let gd = |axis, l| c.group_delay(axis, l, t);
        let delta_gd_first = (gd(a, blue) - gd(b, red)).abs();
        let delta_gd_second = (gd(b, blue) - gd(a, red)).abs();
        let bandwidth = |dgd: f64| {
            let d_omega = SINC2_FWHM_PRODUCT / (settings.length_mm * 1000.0 * dgd / 1000.0);
            omega_interval_to_wavelength(blue, d_omega) * 1000.0
        };
        CddcConfig {
            branch,
            period_um,
            pump_um: pump,
            blue_um: blue,
            red_um: red,
            order_first,
            blue_bandwidth_first_nm: bandwidth(delta_gd_first),
            blue_bandwidth_second_nm: bandwidth(delta_gd_second),
            delta_gd_first,
            delta_gd_second,
            delta_gd_signal_axis: (gd(a, blue) - gd(a, red)).abs(),
            delta_gd_idler_axis: (gd(b, blue) - gd(b, red)).abs(),
            residual_first: d1 - kg,
            residual_second: d2 + kg,
            relative_sum_residual: (d1 + d2).abs() / (d1.abs() + d2.abs()),
        }
    }

    /// Damped Newton iteration on (pump, blue) for Δk₁ = s·K, Δk₂ = −s·K.
    fn newton(&self, mut x: [f64; 2], target: f64, settings: &CddcSettings) -> Option<[f64; 2]> {
        let residual = |x: [f64; 2]| [self.first(x[0], x[1]) - target, self.second(x[0], x[1]) + target];
        let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
        let mut r = residual(x);
        let h = settings.jacobian_step_um;
        for _ in 0..settings.max_iterations {
            if norm(r) < settings.tolerance {
                return Some(x);
            }
            let rp = residual([x[0] + h, x[1]]);
            let rm = residual([x[0] - h, x[1]]);
            let bp = residual([x[0], x[1] + h]);
            let bm = residual([x[0], x[1] - h]);
            let j = [
                [(rp[0] - rm[0]) / (2.0 * h), (bp[0] - bm[0]) / (2.0 * h)],
                [(rp[1] - rm[1]) / (2.0 * h), (bp[1] - bm[1]) / (2.0 * h)],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let step = [
                (j[1][1] * r[0] - j[0][1] * r[1]) / det,
                (j[0][0] * r[1] - j[1][0] * r[0]) / det,
            ];
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial = [x[0] - scale * step[0], x[1] - scale * step[1]];
                let ok = trial[0] > 0.0 && trial[1] > trial[0];
                if ok {
                    let rt = residual(trial);
                    if norm(rt) < norm(r) {
                        x = trial;
                        r = rt;
                        accepted = true;
                        break;
                    }
                }
                scale *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (norm(r) < settings.tolerance).then_some(x)
    }
}

fn check_pols(pols: PolarizationConfig) -> Result<()> {
    if pols.signal == pols.idler {
        return Err(Error::Validation(format!(
            "CDDC needs orthogonally polarized daughters, got {pols}"
        )));
    }
    Ok(())
}

/// Points where the two processes have opposite mismatch, linked into
/// branches by continuity of the blue wavelength between pump samples.
fn sum_curve(pair: &Pair<'_>, settings: &CddcSettings) -> Vec<Vec<(f64, f64)>> {
    let (lo, hi) = degenerate_pump_window(pair.crystal);
    let n = settings.pump_samples.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut closed: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut open: Vec<Vec<(f64, f64)>> = Vec::new();
    for k in 0..n {
        let pump = lo + step * k as f64;
        let roots = match pair.blue_window(pump) {
            Some((b0, b1)) => scan_roots(|b| pair.sum(pump, b), b0, b1, settings.blue_samples, 0.0),
            None => Vec::new(),
        };
        let mut next: Vec<Vec<(f64, f64)>> = Vec::new();
        let mut taken = vec![false; roots.len()];
        for mut branch in open.drain(..) {
            let &(_, last) = branch.last().expect("branches are never empty");
            let trend = match branch.len() {
                1 => 0.0,
                len => last - branch[len - 2].1,
            };
            let predicted = last + trend;
            let reach = 4.0 * step + 2.0 * trend.abs();
            let nearest = roots
                .iter()
                .enumerate()
                .filter(|&(i, b)| !taken[i] && (b - predicted).abs() < reach)
                .min_by(|a, b| (a.1 - predicted).abs().total_cmp(&(b.1 - predicted).abs()));
            match nearest {
                Some((i, &blue)) => {
                    taken[i] = true;
                    branch.push((pump, blue));
                    next.push(branch);
                }
                None => closed.push(branch),
            }
        }
        for (i, &blue) in roots.iter().enumerate() {
            if !taken[i] {
                next.push(vec![(pump, blue)]);
            }
        }
        open = next;
    }
    closed.extend(open);
    closed.retain(|b| b.len() > 1);
    closed.sort_by(|a, b| a[0].0.total_cmp(&b[0].0).then(a[0].1.total_cmp(&b[0].1)));
    closed
}

/// Configurations at a fixed pump wavelength: all blue wavelengths where
/// the two processes' mismatches cancel, each with its implied period.
pub fn cddc_at_pump(
    crystal: &Crystal,
    pols: PolarizationConfig,
    pump_um: f64,
    temperature_c: f64,
    settings: &CddcSettings,
) -> Result<Vec<CddcConfig>> {
    check_pols(pols)?;
    let pair = Pair {
        crystal,
        pols,
        t: temperature_c,
    };
    let Some((b0, b1)) = pair.blue_window(pump_um) else {
        return Ok(Vec::new());
    };
    let roots = scan_roots(|b| pair.sum(pump_um, b), b0, b1, settings.blue_samples.max(2000), 0.0);
    Ok(roots
        .into_iter()
        .enumerate()
        .map(|(i, b)| pair.config(i, pump_um, b, settings))
        .collect())
}

/// Solves both processes simultaneously for each period in a log-spaced
/// range. Rows are ordered by branch, then by increasing period.
pub fn cddc_search(
    crystal: &Crystal,
    pols: PolarizationConfig,
    temperature_c: f64,
    settings: &CddcSettings,
) -> Result<Vec<CddcConfig>> {
    check_pols(pols)?;
    let pair = Pair {
        crystal,
        pols,
        t: temperature_c,
    };
    let (p0, p1) = settings.period_range_um;
    if !(p0 > 0.0 && p1 > p0) {
        return Err(Error::Validation(format!(
            "period range must satisfy 0 < lower < upper, got ({p0}, {p1})"
        )));
    }
    let m = settings.period_samples.max(2);
    let periods: Vec<f64> = (0..m)
        .map(|k| (p0.ln() + (p1.ln() - p0.ln()) * k as f64 / (m - 1) as f64).exp())
        .collect();

    let mut out = Vec::new();
    for (branch, curve) in sum_curve(&pair, settings).into_iter().enumerate() {
        // Grating wavevector along the curve, signed by process one's mismatch.
        let kg: Vec<f64> = curve.iter().map(|&(p, b)| pair.first(p, b)).collect();
        let mut found: Vec<CddcConfig> = Vec::new();
        for &period in &periods {
            let target = 2.0 * PI / period;
            for w in 0..curve.len().saturating_sub(1) {
                for sign in [1.0, -1.0] {
                    let (g0, g1) = (kg[w] - sign * target, kg[w + 1] - sign * target);
                    if g0.signum() == g1.signum() || kg[w].signum() != kg[w + 1].signum() {
                        continue;
                    }
                    let f = g0 / (g0 - g1);
                    let seed = [
                        curve[w].0 + f * (curve[w + 1].0 - curve[w].0),
                        curve[w].1 + f * (curve[w + 1].1 - curve[w].1),
                    ];
                    if let Some([pump, blue]) = pair.newton(seed, sign * target, settings) {
                        let duplicate = found
                            .iter()
                            .any(|c| (c.period_um - period).abs() < 1e-9 * period && (c.pump_um - pump).abs() < 1e-7);
                        if !duplicate {
                            found.push(pair.config(branch, pump, blue, settings));
                        }
                    }
                }
            }
        }
        found.sort_by(|a, b| {
            a.period_um
                .total_cmp(&b.period_um)
                .then(a.pump_um.total_cmp(&b.pump_um))
        });
        out.extend(found);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{CrystalName, CrystalSet};
    use crate::units::energy_residual;

    #[test]
    fn ktp_search_rows_are_consistent() {
        let ktp = CrystalSet::default_set().get(CrystalName::Ktp).unwrap();
        let settings = CddcSettings {
            period_range_um: (40.0, 80.0),
            period_samples: 10,
            pump_samples: 120,
            ..CddcSettings::default()
        };
        let rows = cddc_search(&ktp, PolarizationConfig::TYPE_II, 25.0, &settings).unwrap();
        assert!(!rows.is_empty());
        for r in &rows {
            assert!(r.relative_sum_residual < 1e-8);
            assert!(r.residual_first.abs() < 1e-10 && r.residual_second.abs() < 1e-10);
            assert!(r.blue_um < r.red_um);
            assert!(energy_residual(r.pump_um, r.blue_um, r.red_um) < 1e-12);
        }
    }

    #[test]
    fn daughters_approach_each_other_along_each_branch() {
        let ktp = CrystalSet::default_set().get(CrystalName::Ktp).unwrap();
        let rows = cddc_search(&ktp, PolarizationConfig::TYPE_II, 50.0, &CddcSettings::default()).unwrap();
        assert!(rows.iter().any(|r| r.branch > 0));
        for w in rows.windows(2) {
            if w[0].branch == w[1].branch {
                assert!(w[1].period_um > w[0].period_um);
                assert!(w[1].red_um - w[1].blue_um < w[0].red_um - w[0].blue_um);
            }
        }
    }

    #[test]
    fn parallel_daughters_are_rejected() {
        let ktp = CrystalSet::default_set().get(CrystalName::Ktp).unwrap();
        let pols: PolarizationConfig = "e:ee".parse().unwrap();
        assert!(cddc_search(&ktp, pols, 25.0, &CddcSettings::default()).is_err());
    }
}
