//! Published dispersion formulas and thermo-optic corrections.
//!
//! Each axis of a crystal carries a coefficient set tagged with the formula
//! it belongs to. Evaluation dispatches on the tag; the closed-form
//! wavelength derivative is provided for every form so group delays can be
//! cross-checked against finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SellmeierForm {
    /// n² = A + B/(1 − C/λ²) − Dλ², C in µm².
    OnePoleIr,
    /// n² = A + B/(1 − (λ₀/λ)²) − Dλ², λ₀ in µm.
    OnePoleIrWavelength,
    /// n² = A + B/(1 − C/λ²) + D/(1 − E/λ²) − Fλ².
    TwoPoleIr,
    /// n² = A + B/(λ² − C) + D/(λ² − E).
    TwoPole,
    /// Dispersion-free medium, n = A.
    Constant,
}

impl SellmeierForm {
    pub fn coefficient_count(self) -> usize {
        match self {
            SellmeierForm::OnePoleIr | SellmeierForm::OnePoleIrWavelength => 4,
            SellmeierForm::TwoPoleIr => 6,
            SellmeierForm::TwoPole => 5,
            SellmeierForm::Constant => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierSet {
    pub form: SellmeierForm,
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub citation: String,
}

/// `B λ²/(λ² − C)` and its λ-derivative.
fn ir_pole(b: f64, c: f64, l: f64) -> (f64, f64) {
    let l2 = l * l;
    let d = l2 - c;
    (b * l2 / d, -2.0 * b * c * l / (d * d))
}

/// `B/(λ² − C)` and its λ-derivative.
fn uv_pole(b: f64, c: f64, l: f64) -> (f64, f64) {
    let d = l * l - c;
    (b / d, -2.0 * b * l / (d * d))
}

impl SellmeierSet {
    pub fn new(form: SellmeierForm, coefficients: Vec<f64>) -> Result<Self> {
        let set = SellmeierSet {
            form,
            coefficients,
            citation: String::new(),
        };
        set.validate()?;
        Ok(set)
    }

    pub fn constant(n: f64) -> Self {
        SellmeierSet {
            form: SellmeierForm::Constant,
            coefficients: vec![n],
            citation: "synthetic".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let want = self.form.coefficient_count();
        if self.coefficients.len() != want {
            return Err(Error::Validation(format!(
                "sellmeier.coefficients: form {:?} takes {want} coefficients, found {}",
                self.form,
                self.coefficients.len()
            )));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation(
                "sellmeier.coefficients: non-finite coefficient".into(),
            ));
        }
        Ok(())
    }

    /// n² and d(n²)/dλ at wavelength `l` (µm).
    fn n_squared(&self, l: f64) -> (f64, f64) {
        let c = &self.coefficients;
        match self.form {
            SellmeierForm::OnePoleIr => {
                let (p, dp) = ir_pole(c[1], c[2], l);
                (c[0] + p - c[3] * l * l, dp - 2.0 * c[3] * l)
            }
            SellmeierForm::OnePoleIrWavelength => {
                let (p, dp) = ir_pole(c[1], c[2] * c[2], l);
                (c[0] + p - c[3] * l * l, dp - 2.0 * c[3] * l)
            }
            SellmeierForm::TwoPoleIr => {
                let (p1, dp1) = ir_pole(c[1], c[2], l);
                let (p2, dp2) = ir_pole(c[3], c[4], l);
                (c[0] + p1 + p2 - c[5] * l * l, dp1 + dp2 - 2.0 * c[5] * l)
            }
            SellmeierForm::TwoPole => {
                let (p1, dp1) = uv_pole(c[1], c[2], l);
                let (p2, dp2) = uv_pole(c[3], c[4], l);
                (c[0] + p1 + p2, dp1 + dp2)
            }
            SellmeierForm::Constant => (c[0] * c[0], 0.0),
        }
    }

    /// Refractive index at wavelength `l` (µm), without temperature correction.
    pub fn index(&self, l: f64) -> f64 {
        self.n_squared(l).0.sqrt()
    }

    /// Closed-form dn/dλ (1/µm).
    pub fn index_derivative(&self, l: f64) -> f64 {
        let (n2, dn2) = self.n_squared(l);
        dn2 / (2.0 * n2.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermoOpticForm {
    /// Δn = Σ_k ΔT^k Σ_m a[k][m] λ^(−m)
    InversePowerSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoOptic {
    pub form: ThermoOpticForm,
    pub reference_temperature_c: f64,
    pub coefficients: Vec<Vec<f64>>,
    #[serde(default)]
    pub citation: String,
}

impl ThermoOptic {
    pub fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() || self.coefficients.iter().any(Vec::is_empty) {
            return Err(Error::Validation("thermo_optic.coefficients: empty series".into()));
        }
        if !self.reference_temperature_c.is_finite() || self.coefficients.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Validation("thermo_optic: non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Index correction Δn and its λ-derivative at (λ, T).
    pub fn correction(&self, l: f64, temperature_c: f64) -> (f64, f64) {
        let dt = temperature_c - self.reference_temperature_c;
        let mut dn = 0.0;
        let mut ddn = 0.0;
        let mut dt_pow = 1.0;
        for row in &self.coefficients {
            dt_pow *= dt;
            let mut inv_pow = 1.0;
            for (m, a) in row.iter().enumerate() {
                dn += dt_pow * a * inv_pow;
                ddn -= dt_pow * (m as f64) * a * inv_pow / l;
                inv_pow /= l;
            }
        }
        (dn, ddn)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-5;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let sets = [
            SellmeierSet::new(SellmeierForm::OnePoleIr, vec![2.09930, 0.922683, 0.0467695, 0.0138408]).unwrap(),
            SellmeierSet::new(
                SellmeierForm::OnePoleIrWavelength,
                vec![2.15912, 1.00099, 0.21844, 0.01096],
            )
            .unwrap(),
            SellmeierSet::new(
                SellmeierForm::TwoPoleIr,
                vec![2.12725, 1.18431, 0.0514852, 0.6603, 100.00507, 0.00968956],
            )
            .unwrap(),
            SellmeierSet::new(
                SellmeierForm::TwoPole,
                vec![3.45018, 0.04341, 0.04597, 16.98825, 39.43799],
            )
            .unwrap(),
        ];
        for s in &sets {
            for l in [0.5, 0.8, 1.3, 2.2, 3.5] {
                let a = s.index_derivative(l);
                let n = fd(|x| s.index(x), l);
                assert!((a - n).abs() < 1e-7 * a.abs().max(1e-3), "{:?} {l}", s.form);
            }
        }
    }

    #[test]
    fn wrong_coefficient_count_is_rejected() {
        let err = SellmeierSet::new(SellmeierForm::TwoPoleIr, vec![1.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("coefficients"));
    }

    #[test]
    fn thermo_correction_vanishes_at_reference() {
        let t = ThermoOptic {
            form: ThermoOpticForm::InversePowerSeries,
            reference_temperature_c: 20.0,
            coefficients: vec![vec![1e-5, 2e-6], vec![3e-8]],
            citation: String::new(),
        };
        assert_eq!(t.correction(1.0, 20.0), (0.0, 0.0));
        let (dn, _) = t.correction(2.0, 30.0);
        let expected = 10.0 * (1e-5 + 2e-6 / 2.0) + 100.0 * 3e-8;
        assert!((dn - expected).abs() < 1e-18);
        let (_, ddn) = t.correction(1.5, 45.0);
        let num = fd(|l| t.correction(l, 45.0).0, 1.5);
        assert!((ddn - num).abs() < 1e-12);
    }
}
