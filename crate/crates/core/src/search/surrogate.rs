//! Linearized joint spectrum used to pre-screen atlas candidates.
//!
//! Expanding the mismatch to first order around a phase-matched pair gives
//! Δk ≈ α δω_s + β δω_i with α = GD_p − GD_s and β = GD_p − GD_i. In units
//! of the pump spectral width the intensity becomes
//! exp(−(u + v)²)·sinc²(g (cos θ u + sin θ v)), so after optimizing pulse
//! duration and crystal length (which only enter through g) the best
//! achievable K_JSI depends on θ = atan2(β, α) alone.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::qpm::sinc;

const ANGLE_SAMPLES: usize = 181;
const GRID: usize = 64;

/// K_JSI of the linearized spectrum.
pub fn linear_schmidt_jsi(theta: f64, g: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let pump_extent = 3.0;
    let pm_extent = 4.0 * PI / g;
    let skew = (s - c).abs().max(1e-3);
    let half = ((s.abs() * pump_extent + pm_extent) / skew)
        .max((c.abs() * pump_extent + pm_extent) / skew)
        .min(60.0);
    let step = 2.0 * half / (GRID - 1) as f64;
    let jsi = DMatrix::from_fn(GRID, GRID, |r, k| {
        let u = -half + step * r as f64;
        let v = -half + step * k as f64;
        let x = g * (c * u + s * v);
        (-(u + v) * (u + v)).exp() * sinc(x).powi(2)
    });
    let gram = &jsi * jsi.transpose();
    let norm2: f64 = jsi.iter().map(|x| x * x).sum();
    norm2 * norm2 / gram.iter().map(|x| x * x).sum::<f64>()
}

struct Table {
    min_k: Vec<f64>,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let min_k = (0..ANGLE_SAMPLES)
            .map(|i| {
                let theta = PI * i as f64 / (ANGLE_SAMPLES - 1) as f64;
                minimize_over_g(|g| linear_schmidt_jsi(theta, g))
            })
            .collect();
        Table { min_k }
    })
}

/// Log-spaced scan over g, then golden-section refinement around the best
/// sample unless the scan is already far from pure.
fn minimize_over_g(k: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = (0.05f64.ln(), 50f64.ln());
    let n = 16;
    let step = (hi - lo) / (n - 1) as f64;
    let samples: Vec<f64> = (0..n).map(|i| k((lo + step * i as f64).exp())).collect();
    let (best, kbest) = samples
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, v)| if v < b.1 { (i, v) } else { b });
    if kbest > 1.2 {
        return kbest;
    }
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo + step * (best as f64 - 1.0), lo + step * (best as f64 + 1.0));
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (k(x1.exp()), k(x2.exp()));
    while b - a > 1e-3 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = k(x1.exp());
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = k(x2.exp());
        }
    }
    kbest.min(f1).min(f2)
}

/// Smallest K_JSI the linearized model reaches for group-delay offsets
/// α = GD_p − GD_s and β = GD_p − GD_i.
pub fn min_schmidt_jsi(alpha: f64, beta: f64) -> f64 {
    let theta = beta.atan2(alpha).rem_euclid(PI);
    let t = table();
    let pos = theta / PI * (ANGLE_SAMPLES - 1) as f64;
    let i = (pos.floor() as usize).min(ANGLE_SAMPLES - 2);
    let w = pos - i as f64;
    t.min_k[i] * (1.0 - w) + t.min_k[i + 1] * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_matching_is_nearly_pure() {
        // D = 1: α = −β
        let k = min_schmidt_jsi(1.0, -1.0);
        assert!(k < 1.01 && k > 1.0, "{k}");
        // D = 0: pump matched to the signal
        let k0 = min_schmidt_jsi(0.0, 1.0);
        assert!(k0 < 1.01, "{k0}");
    }

    #[test]
    fn same_sign_walkoff_is_correlated() {
        assert!(min_schmidt_jsi(1.0, 0.8) > 1.5);
        assert!(min_schmidt_jsi(-1.0, -1.2) > 1.5);
    }
}
