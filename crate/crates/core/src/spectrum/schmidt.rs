use nalgebra::{ComplexField, DMatrix};
use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

use super::{JointSpectrum, SpectrumMode, C64};
use crate::error::{Error, Result};
use crate::units::omega_from_wavelength;

/// Normalized Schmidt coefficients of a joint spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtDecomposition {
    pub mode: SpectrumMode,
    /// Descending, summing to one.
    pub coefficients: Vec<f64>,
}

impl SchmidtDecomposition {
    fn from_singular_values(mode: SpectrumMode, singular: impl IntoIterator<Item = f64>) -> Self {
        let mut squares: Vec<f64> = singular.into_iter().map(|s| s * s).collect();
        squares.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = squares.iter().sum();
        let coefficients = squares.into_iter().map(|x| x / total).collect();
        SchmidtDecomposition { mode, coefficients }
    }

    pub fn purity(&self) -> f64 {
        self.coefficients.iter().map(|x| x * x).sum()
    }

    pub fn schmidt_number(&self) -> f64 {
        1.0 / self.purity()
    }
}

/// Singular-value decomposition of the amplitude or the intensity grid.
pub fn schmidt_decompose(js: &JointSpectrum, mode: SpectrumMode) -> Result<SchmidtDecomposition> {
    let singular = match mode {
        SpectrumMode::Amplitude => singular_values(js.amplitudes().clone())?,
        SpectrumMode::Intensity => singular_values(js.intensity())?,
    };
    if singular.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(SchmidtDecomposition::from_singular_values(mode, singular))
}

/// Sweeps allowed per matrix dimension before an iterative solver gives up.
const SWEEPS_PER_DIMENSION: usize = 50;

/// Singular values by bounded SVD, falling back to the eigenvalues of the
/// smaller Gram matrix when the SVD iteration stalls.
fn singular_values<T: ComplexField<RealField = f64>>(m: DMatrix<T>) -> Result<Vec<f64>> {
    let limit = SWEEPS_PER_DIMENSION * m.nrows().max(m.ncols()).max(1);
    match nalgebra::SVD::try_new(m.clone(), false, false, f64::EPSILON, limit) {
        Some(svd) => Ok(svd.singular_values.iter().copied().collect()),
        None => gram_singular_values(&m, limit),
    }
}

fn gram_singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, limit: usize) -> Result<Vec<f64>> {
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let eigen = nalgebra::SymmetricEigen::try_new(gram, f64::EPSILON, limit)
        .ok_or_else(|| Error::NonConvergence("singular value decomposition did not converge".into()))?;
    Ok(eigen.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect())
}

/// Purity without a full decomposition: ‖M M†‖²_F / ‖M‖⁴_F.
pub fn schmidt_purity(js: &JointSpectrum, mode: SpectrumMode) -> f64 {
    match mode {
        SpectrumMode::Amplitude => {
            let a = js.amplitudes();
            let gram = a * a.adjoint();
            let norm2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            gram.iter().map(|z| z.norm_sqr()).sum::<f64>() / (norm2 * norm2)
        }
        SpectrumMode::Intensity => {
            let j = js.intensity();
            let gram = &j * j.transpose();
            let norm2: f64 = j.iter().map(|x| x * x).sum();
            gram.iter().map(|x| x * x).sum::<f64>() / (norm2 * norm2)
        }
    }
}

/// Trace-normalized reduced density matrix of one daughter.
#[derive(Debug, Clone)]
pub struct ReducedState {
    pub axis_um: Vec<f64>,
    pub matrix: DMatrix<C64>,
}

impl ReducedState {
    pub fn new(axis_um: Vec<f64>, matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != axis_um.len() {
            return Err(Error::Validation(
                "reduced state: matrix must be square and match its axis".into(),
            ));
        }
        let trace = matrix.trace().re;
        if !(trace > 0.0) || !trace.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(ReducedState {
            axis_um,
            matrix: matrix.unscale(trace),
        })
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    fn shares_axis(&self, other: &ReducedState) -> bool {
        self.axis_um.len() == other.axis_um.len()
            && self
                .axis_um
                .iter()
                .zip(&other.axis_um)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs())
    }
}

impl JointSpectrum {
    /// ρ_s ∝ A A†.
    pub fn reduced_signal(&self) -> Result<ReducedState> {
        let a = self.amplitudes();
        ReducedState::new(self.signal_axis().to_vec(), a * a.adjoint())
    }

    /// ρ_i ∝ Aᵀ A*.
    pub fn reduced_idler(&self) -> Result<ReducedState> {
        let a = self.amplitudes();
        ReducedState::new(self.idler_axis().to_vec(), a.transpose() * a.conjugate())
    }
}

/// Upper bound on the HOM visibility between two independent sources,
/// Tr(ρ_A ρ_B) = (P_A + P_B)/2 − ‖ρ_A − ρ_B‖²_F/2, at zero relative delay.
pub fn hom_visibility_bound(a: &ReducedState, b: &ReducedState) -> Result<f64> {
    if !a.shares_axis(b) {
        return Err(Error::AxesDiffer);
    }
    Ok(overlap_at_delay(&overlap_terms(a, b), &omegas(&a.axis_um), 0.0))
}

fn omegas(axis_um: &[f64]) -> Vec<f64> {
    axis_um.iter().map(|&l| omega_from_wavelength(l)).collect()
}

/// ρ_A[j,k]·ρ_B[k,j], so that Tr(ρ_A D ρ_B D†) = Σ terms·e^{i(ω_k − ω_j)τ}.
fn overlap_terms(a: &ReducedState, b: &ReducedState) -> DMatrix<C64> {
    let n = a.matrix.nrows();
    DMatrix::from_fn(n, n, |j, k| a.matrix[(j, k)] * b.matrix[(k, j)])
}

fn overlap_at_delay(terms: &DMatrix<C64>, omega: &[f64], delay_ps: f64) -> f64 {
    let n = omega.len();
    let phase: Vec<C64> = omega.iter().map(|w| C64::from_polar(1.0, w * delay_ps)).collect();
    let mut acc = 0.0;
    for k in 0..n {
        for j in 0..n {
            acc += (terms[(j, k)] * phase[k] * phase[j].conj()).re;
        }
    }
    acc
}

/// HOM visibility bound with the relative delay between the two photons
/// chosen to maximize it: max over τ of Tr(ρ_A D(τ) ρ_B D(τ)†) with
/// D(τ) = diag(e^{iωτ}). Returns the bound and the delay (ps).
pub fn delay_optimized_overlap(a: &ReducedState, b: &ReducedState) -> Result<(f64, f64)> {
    if !a.shares_axis(b) {
        return Err(Error::AxesDiffer);
    }
    let n = a.axis_um.len();
    let omega = omegas(&a.axis_um);
    let terms = overlap_terms(a, b);
    // Coarse scan on the mean frequency spacing, binned by index offset.
    let d_omega = (omega[n - 1] - omega[0]) / (n - 1) as f64;
    let mut by_offset = vec![C64::new(0.0, 0.0); 2 * n - 1];
    for j in 0..n {
        for k in 0..n {
            by_offset[k + n - 1 - j] += terms[(j, k)];
        }
    }
    let span = PI / d_omega.abs();
    let samples = 8 * n;
    let step = 2.0 * span / samples as f64;
    let coarse = |tau: f64| {
        by_offset
            .iter()
            .enumerate()
            .map(|(i, c)| (c * C64::from_polar(1.0, (i as f64 - (n - 1) as f64) * d_omega * tau)).re)
            .sum::<f64>()
    };
    let mut best_tau = 0.0;
    let mut best = coarse(0.0);
    for s in 0..=samples {
        let tau = -span + step * s as f64;
        let v = coarse(tau);
        if v > best {
            best = v;
            best_tau = tau;
        }
    }
    // Golden-section refinement with the exact phases.
    let f = |tau: f64| overlap_at_delay(&terms, &omega, tau);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (best_tau - step, best_tau + step);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    let candidates = [(f(0.0), 0.0), (f(best_tau), best_tau), (f1, x1), (f2, x2)];
    let (value, tau) = candidates
        .into_iter()
        .fold((f64::NEG_INFINITY, 0.0), |b, c| if c.0 > b.0 { c } else { b });
    Ok((value, tau))
}

/// Spectral distinguishability of signal and idler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distinguishability {
    /// ‖ρ_s − D ρ_i D†‖²_F/2 at the best relative delay.
    pub delta: f64,
    /// Relative delay applied to the idler, ps.
    pub delay_ps: f64,
    /// Purity of the signal and idler reduced states.
    pub purity: f64,
}

/// Δ between the signal and idler reduced states, compared bin by bin on
/// a square grid after compensating the relative group delay of the two
/// photons. The axes themselves are not compared.
pub fn distinguishability(js: &JointSpectrum) -> Result<Distinguishability> {
    if !js.amplitudes().is_square() {
        return Err(Error::AxesDiffer);
    }
    let rs = js.reduced_signal()?;
    let mut ri = js.reduced_idler()?;
    ri.axis_um = rs.axis_um.clone();
    let (overlap, delay_ps) = delay_optimized_overlap(&rs, &ri)?;
    let purity = 0.5 * (rs.purity() + ri.purity());
    Ok(Distinguishability {
        delta: (purity - overlap).clamp(0.0, 1.0),
        delay_ps,
        purity,
    })
}

/// Figures of merit of a joint spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtReport {
    pub coefficients: Vec<f64>,
    pub schmidt_number: f64,
    pub purity: f64,
    pub schmidt_number_jsi: f64,
    pub purity_jsi: f64,
    pub signal_fwhm_nm: f64,
    pub idler_fwhm_nm: f64,
    /// Absent when the grid is not square.
    pub distinguishability: Option<f64>,
    /// P − Δ for signal against idler of identical sources.
    pub hom_visibility: Option<f64>,
    /// Signal and idler axes do not coincide; Δ compares bins, not wavelengths.
    pub axes_differ: bool,
    pub flags: Vec<String>,
}

impl SchmidtReport {
    pub fn from_spectrum(js: &JointSpectrum) -> Result<Self> {
        let amp = schmidt_decompose(js, SpectrumMode::Amplitude)?;
        let int = schmidt_decompose(js, SpectrumMode::Intensity)?;
        let marginals = js.marginals();
        let purity = amp.purity();
        let distinguishability = distinguishability(js).ok().map(|d| d.delta);
        Ok(SchmidtReport {
            schmidt_number: amp.schmidt_number(),
            purity,
            schmidt_number_jsi: int.schmidt_number(),
            purity_jsi: int.purity(),
            signal_fwhm_nm: marginals.signal_fwhm_nm,
            idler_fwhm_nm: marginals.idler_fwhm_nm,
            distinguishability,
            hom_visibility: distinguishability.map(|d| purity - d),
            axes_differ: !js.axes_match(),
            flags: js.flags().describe().into_iter().map(String::from).collect(),
            coefficients: amp.coefficients,
        })
    }

    pub fn bandwidth_ratio(&self) -> f64 {
        self.signal_fwhm_nm / self.idler_fwhm_nm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::tests::ktp_791;
    use crate::spectrum::{build_jsa, linspace, GridSpec, PumpPulse};

    #[test]
    fn gram_route_matches_svd() {
        let m = DMatrix::from_fn(5, 7, |r, c| {
            C64::new((r * 7 + c) as f64 % 3.0 - 1.0, (r + 2 * c) as f64 % 5.0 * 0.1)
        });
        let mut svd = singular_values(m.clone()).unwrap();
        let mut gram = gram_singular_values(&m, 500).unwrap();
        for v in [&mut svd, &mut gram] {
            v.sort_by(|a, b| b.total_cmp(a));
        }
        for (a, b) in svd.iter().zip(&gram) {
            assert!((a - b).abs() < 1e-9 * svd[0], "{a} vs {b}");
        }
    }

    struct Rng(u64);

    impl Rng {
        fn next(&mut self) -> f64 {
            self.0 ^= self.0 << 13;
            self.0 ^= self.0 >> 7;
            self.0 ^= self.0 << 17;
            (self.0 >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        }
    }

    fn random_spectrum(rng: &mut Rng, rows: usize, cols: usize) -> JointSpectrum {
        let m = DMatrix::from_fn(rows, cols, |_, _| C64::new(rng.next(), rng.next()));
        JointSpectrum::from_matrix(m, linspace(1.0, 2.0, rows), linspace(1.0, 2.0, cols)).unwrap()
    }

    /// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
    fn jacobi_eigenvalues(mut m: DMatrix<f64>) -> Vec<f64> {
        let n = m.nrows();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| m[(i, j)] * m[(i, j)])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if m[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                }
            }
        }
        (0..n).map(|i| m[(i, i)]).collect()
    }

    #[test]
    fn svd_matches_gram_eigendecomposition() {
        let mut rng = Rng(0x9e3779b97f4a7c15);
        let js = random_spectrum(&mut rng, 8, 8);
        let a = js.amplitudes();
        let g = a * a.adjoint();
        // Hermitian G = X + iY has the real symmetric embedding [[X, −Y], [Y, X]]
        // whose spectrum is that of G with every eigenvalue doubled.
        let n = 8;
        let embed = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
            let z = g[(r % n, c % n)];
            match (r < n, c < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let mut eig = jacobi_eigenvalues(embed);
        eig.sort_by(|a, b| b.total_cmp(a));
        let oracle: Vec<f64> = eig.iter().step_by(2).copied().collect();
        let total: f64 = oracle.iter().sum();
        let dec = schmidt_decompose(&js, SpectrumMode::Amplitude).unwrap();
        for (a, b) in dec.coefficients.iter().zip(&oracle) {
            assert!((a - b / total).abs() < 1e-9, "{a} vs {}", b / total);
        }
    }

    #[test]
    fn rank_one_grid_is_pure() {
        let ax = linspace(1.5, 1.6, 32);
        let js = JointSpectrum::from_fn(ax.clone(), ax, |s, i| {
            C64::new((-(s - 1.55f64).powi(2) * 1e4).exp(), 0.0) * C64::new(0.0, (i * 40.0).sin() + 2.0)
        })
        .unwrap();
        let dec = schmidt_decompose(&js, SpectrumMode::Amplitude).unwrap();
        assert!((dec.schmidt_number() - 1.0).abs() < 1e-9);
        assert!((dec.coefficients[0] - 1.0).abs() < 1e-9);
        assert!((schmidt_purity(&js, SpectrumMode::Amplitude) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_and_transposition() {
        let mut rng = Rng(7);
        let js = random_spectrum(&mut rng, 12, 9);
        let dec = schmidt_decompose(&js, SpectrumMode::Amplitude).unwrap();
        assert!((dec.coefficients.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((dec.purity() * dec.schmidt_number() - 1.0).abs() < 1e-12);
        let fast = schmidt_purity(&js, SpectrumMode::Amplitude);
        assert!((fast - dec.purity()).abs() < 1e-12);
        let t = schmidt_decompose(&js.transposed(), SpectrumMode::Amplitude).unwrap();
        for (a, b) in dec.coefficients.iter().zip(&t.coefficients) {
            assert!((a - b).abs() < 1e-12);
        }
        let int = schmidt_decompose(&js, SpectrumMode::Intensity).unwrap();
        assert!((schmidt_purity(&js, SpectrumMode::Intensity) - int.purity()).abs() < 1e-12);
    }

    #[test]
    fn distinguishability_matches_direct_frobenius() {
        let mut rng = Rng(99);
        let js = random_spectrum(&mut rng, 10, 10);
        let rs = js.reduced_signal().unwrap();
        let ri = js.reduced_idler().unwrap();
        let d = distinguishability(&js).unwrap();
        // Oracle: shift the idler state by the reported delay and take the
        // Frobenius distance directly.
        let w: Vec<f64> = rs.axis_um.iter().map(|&l| omega_from_wavelength(l)).collect();
        let shifted = DMatrix::from_fn(10, 10, |j, k| {
            ri.matrix[(j, k)] * C64::from_polar(1.0, (w[j] - w[k]) * d.delay_ps)
        });
        let direct = (&rs.matrix - &shifted).iter().map(|z| z.norm_sqr()).sum::<f64>() / 2.0;
        assert!((d.delta - direct).abs() < 1e-12);
        let unshifted = (&rs.matrix - &ri.matrix).iter().map(|z| z.norm_sqr()).sum::<f64>() / 2.0;
        assert!(d.delta <= unshifted + 1e-15);
        let v = hom_visibility_bound(&rs, &ri).unwrap();
        let expected = 0.5 * (rs.purity() + ri.purity()) - unshifted;
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn pure_delay_is_compensated() {
        let ax = linspace(1.57, 1.59, 48);
        let js = JointSpectrum::from_fn(ax.clone(), ax, |s, i| {
            let env = (-((s - 1.58) * 400.0).powi(2) - ((i - 1.58) * 400.0).powi(2)).exp();
            // opposite delays on the two photons
            let tau = 0.3;
            C64::from_polar(env, (omega_from_wavelength(s) - omega_from_wavelength(i)) * tau)
        })
        .unwrap();
        let d = distinguishability(&js).unwrap();
        assert!(d.delta < 1e-9, "{d:?}");
        assert!((d.delay_ps.abs() - 0.6).abs() < 1e-6, "{d:?}");
    }

    #[test]
    fn symmetric_spectrum_is_indistinguishable() {
        let mut rng = Rng(3);
        let m = DMatrix::from_fn(6, 6, |_, _| C64::new(rng.next(), rng.next()));
        let sym = &m + m.transpose();
        let ax = linspace(1.0, 1.1, 6);
        let js = JointSpectrum::from_matrix(sym, ax.clone(), ax).unwrap();
        assert!(distinguishability(&js).unwrap().delta < 1e-14);
    }

    #[test]
    fn visibility_of_identical_states_is_their_purity() {
        let mut rng = Rng(11);
        let js = random_spectrum(&mut rng, 7, 7);
        let rs = js.reduced_signal().unwrap();
        let v = hom_visibility_bound(&rs, &rs).unwrap();
        assert!((v - rs.purity()).abs() < 1e-12);
        let other = random_spectrum(&mut rng, 5, 5).reduced_signal().unwrap();
        assert!(matches!(hom_visibility_bound(&rs, &other), Err(Error::AxesDiffer)));
    }

    #[test]
    fn random_density_matrices_trace_product() {
        let mut rng = Rng(1234);
        let a = random_spectrum(&mut rng, 6, 4).reduced_signal().unwrap();
        let b = random_spectrum(&mut rng, 6, 9).reduced_signal().unwrap();
        let direct = (&a.matrix * &b.matrix).trace().re;
        assert!((hom_visibility_bound(&a, &b).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn ktp_report_is_self_consistent() {
        let p = ktp_791(30.0);
        let pump = PumpPulse::new(0.791, 2.5).unwrap();
        let js = build_jsa(&p, &pump, &GridSpec::square(128)).unwrap();
        let r = SchmidtReport::from_spectrum(&js).unwrap();
        assert!((r.purity * r.schmidt_number - 1.0).abs() < 1e-9);
        assert!(r.purity_jsi >= r.purity);
        let d = r.distinguishability.unwrap();
        assert!((0.0..=1.0).contains(&d));
        assert!(r.hom_visibility.unwrap() <= r.purity);
    }
}
