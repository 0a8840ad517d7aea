use std::f64::consts::LN_2;

use super::JointSpectrum;
use crate::error::{Error, Result};

/// Applies Gaussian bandpass filters centred on the marginal peaks. The
/// filter amplitude is chosen so the transmitted intensity has the given
/// FWHM (nm). Returns the renormalized spectrum and the transmitted
/// intensity fraction. An infinite width leaves that arm unfiltered.
pub fn apply_bandpass(js: &JointSpectrum, fwhm_signal_nm: f64, fwhm_idler_nm: f64) -> Result<(JointSpectrum, f64)> {
    let (ds, di) = js.spacing_um();
    for (fwhm, spacing) in [(fwhm_signal_nm, ds * 1000.0), (fwhm_idler_nm, di * 1000.0)] {
        if fwhm.is_nan() || fwhm < 3.0 * spacing {
            return Err(Error::FilterUnderResolved {
                fwhm_nm: fwhm,
                min_nm: 3.0 * spacing,
            });
        }
    }
    let m = js.marginals();
    let transmission = |center: f64, fwhm_nm: f64| {
        let width = fwhm_nm / 1000.0;
        move |l: f64| {
            if width.is_infinite() {
                1.0
            } else {
                (-2.0 * LN_2 * (l - center).powi(2) / (width * width)).exp()
            }
        }
    };
    let ts = transmission(m.signal_peak_um, fwhm_signal_nm);
    let ti = transmission(m.idler_peak_um, fwhm_idler_nm);
    let sig: Vec<f64> = js.signal_axis().iter().map(|&l| ts(l)).collect();
    let idl: Vec<f64> = js.idler_axis().iter().map(|&l| ti(l)).collect();
    js.reweighted(|r, c| sig[r] * idl[c])
}
