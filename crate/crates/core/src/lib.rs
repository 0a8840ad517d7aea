//! Design engine for photon-pair sources based on spontaneous parametric
//! downconversion in periodically poled KTP-family crystals.
//!
//! The crate is organised bottom-up:
//!
//! * [`crystal`] loads and validates material data,
//! * [`dispersion`] evaluates refractive index, wavenumber and group delay,
//! * [`qpm`] holds phase-mismatch evaluation and the phase-matching solvers,
//! * [`spectrum`] builds joint spectral amplitudes and derives figures of merit,
//! * [`search`] runs the configuration-space sweeps,
//! * [`io`] writes matrices, tables and run manifests.
//!
//! Units are fixed at module boundaries: wavelengths in µm, angular
//! frequencies in rad/ps, wavenumbers in rad/µm, group delays in ps/mm,
//! crystal lengths in mm and pulse durations in ps.

pub mod crystal;
pub mod dispersion;
pub mod error;
pub mod io;
pub mod qpm;
pub mod roots;
pub mod search;
pub mod sellmeier;
pub mod spectrum;
pub mod units;

pub use crystal::{Axis, Crystal, CrystalName, CrystalSet, PolarizationConfig, SpdcType};
pub use dispersion::{DispersionFlags, OpticalQuery};
pub use error::{Error, Result};
pub use qpm::{Grating, SpdcProcess};
pub use spectrum::{GridSpec, JointSpectrum, PumpPulse, SchmidtDecomposition, SchmidtReport, SpectrumMode};
