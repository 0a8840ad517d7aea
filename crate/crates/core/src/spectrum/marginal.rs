use serde::{Deserialize, Serialize};

use super::JointSpectrum;

/// Single-photon spectra obtained by tracing out the partner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    pub signal: Vec<f64>,
    pub idler: Vec<f64>,
    pub signal_fwhm_nm: f64,
    pub idler_fwhm_nm: f64,
    pub signal_peak_um: f64,
    pub idler_peak_um: f64,
}

/// Full width at half maximum of a sampled curve, by linear interpolation
/// between samples. A side that never drops below half maximum is cut at
/// the last sample.
pub fn fwhm(axis: &[f64], values: &[f64]) -> f64 {
    let (peak_idx, peak) = argmax(values);
    let half = 0.5 * peak;
    let crossing = |a: usize, b: usize| {
        let (ya, yb) = (values[a], values[b]);
        axis[a] + (half - ya) * (axis[b] - axis[a]) / (yb - ya)
    };
    let left = (1..=peak_idx)
        .rev()
        .find(|&k| values[k - 1] < half)
        .map_or(axis[0], |k| crossing(k - 1, k));
    let right = (peak_idx..values.len() - 1)
        .find(|&k| values[k + 1] < half)
        .map_or(axis[axis.len() - 1], |k| crossing(k, k + 1));
    right - left
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values.iter().copied().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (k, v)| if v > best.1 { (k, v) } else { best },
    )
}

impl JointSpectrum {
    pub fn marginals(&self) -> Marginals {
        let jsi = self.intensity();
        let signal: Vec<f64> = jsi.row_iter().map(|r| r.sum()).collect();
        let idler: Vec<f64> = jsi.column_iter().map(|c| c.sum()).collect();
        let s_axis = self.signal_axis();
        let i_axis = self.idler_axis();
        Marginals {
            signal_fwhm_nm: fwhm(s_axis, &signal) * 1000.0,
            idler_fwhm_nm: fwhm(i_axis, &idler) * 1000.0,
            signal_peak_um: s_axis[argmax(&signal).0],
            idler_peak_um: i_axis[argmax(&idler).0],
            signal,
            idler,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{linspace, C64};

    #[test]
    fn gaussian_width() {
        let x = linspace(-5.0, 5.0, 2001);
        let y: Vec<f64> = x.iter().map(|v| (-v * v / 2.0).exp()).collect();
        let expected = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt();
        assert!((fwhm(&x, &y) - expected).abs() < 1e-5);
    }

    #[test]
    fn triangle_width_is_exact() {
        let x = linspace(0.0, 4.0, 5);
        let y = [0.0, 0.5, 1.0, 0.5, 0.0];
        // half-maximum is reached exactly at samples 1 and 3
        assert_eq!(fwhm(&x, &y), 2.0);
    }

    #[test]
    fn symmetric_grid_has_equal_widths() {
        let ax = linspace(1.5, 1.7, 41);
        let js = JointSpectrum::from_fn(ax.clone(), ax, |s, i| {
            C64::new((-(s + i - 3.2f64).powi(2) * 900.0 - (s - i).powi(2) * 200.0).exp(), 0.0)
        })
        .unwrap();
        let m = js.marginals();
        assert_eq!(m.signal_fwhm_nm, m.idler_fwhm_nm);
        let t = js.transposed().marginals();
        assert_eq!(t.signal_fwhm_nm, m.idler_fwhm_nm);
    }
}
