use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectrum::{apply_bandpass, JointSpectrum, SchmidtReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterScanRow {
    /// Filter intensity FWHM on both arms, nm; infinite for the unfiltered row.
    pub filter_fwhm_nm: f64,
    pub purity: f64,
    pub hom_visibility: f64,
    pub transmitted_fraction: f64,
    pub signal_fwhm_nm: f64,
    pub idler_fwhm_nm: f64,
}

/// Identical Gaussian filters on both arms, one row per width plus the
/// unfiltered spectrum first.
pub fn filter_scan(js: &JointSpectrum, fwhm_nm: &[f64]) -> Result<Vec<FilterScanRow>> {
    std::iter::once(f64::INFINITY)
        .chain(fwhm_nm.iter().copied())
        .map(|w| {
            let (filtered, kept) = apply_bandpass(js, w, w)?;
            let r = SchmidtReport::from_spectrum(&filtered)?;
            Ok(FilterScanRow {
                filter_fwhm_nm: w,
                purity: r.purity,
                hom_visibility: r.hom_visibility.unwrap_or(f64::NAN),
                transmitted_fraction: kept,
                signal_fwhm_nm: r.signal_fwhm_nm,
                idler_fwhm_nm: r.idler_fwhm_nm,
            })
        })
        .collect()
}
