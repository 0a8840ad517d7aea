//! Configuration-space sweeps built on the spectrum and QPM layers.

mod atlas;
mod cddc;
mod degenerate;
mod filter_scan;
mod optimize;
pub mod surrogate;

pub use atlas::{pump_grid, purity_atlas, AtlasPoint, AtlasSettings, PURE_SCHMIDT_JSI};
pub use cddc::{cddc_at_pump, cddc_search, CddcConfig, CddcSettings};
pub use degenerate::{
    degenerate_gvm_mismatch, degenerate_gvm_point, degenerate_pump_window, degenerate_scan, DegenerateScanRow,
};
pub use filter_scan::{filter_scan, FilterScanRow};
pub use optimize::{
    maximize_log_box, optimize_tau_l, purity_at, report_at, Bounds, Maximum, OptimizeSettings, TauLOptimum,
};
