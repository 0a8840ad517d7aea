//! Fully resolved run configuration, as recorded in manifests.

use serde::{Deserialize, Serialize};

use pairsource::qpm::Grating;
use pairsource::search::{AtlasSettings, Bounds, CddcSettings, OptimizeSettings};
use pairsource::SpectrumMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Matrix,
}

/// Inclusive pump range in µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpRange {
    pub start_um: f64,
    pub stop_um: f64,
    pub step_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Task {
    Jsa {
        pump_um: f64,
        signal_um: f64,
        length_mm: f64,
        tau_ps: f64,
        grating: Grating,
        components: bool,
    },
    Optimize {
        pump_um: f64,
        signal_um: f64,
        grating: Grating,
        mode: SpectrumMode,
        bounds: Bounds,
        settings: OptimizeSettings,
        surface_points: usize,
        components: bool,
    },
    Atlas {
        pumps: PumpRange,
        settings: AtlasSettings,
    },
    Gvm {
        scan: Option<PumpRange>,
        bounds: Bounds,
        settings: OptimizeSettings,
    },
    Cddc {
        pump_um: Option<f64>,
        settings: CddcSettings,
    },
    Bulk {
        pumps: PumpRange,
        optimize_pump_um: Option<f64>,
        bounds: Bounds,
        settings: OptimizeSettings,
    },
    Filter {
        pump_um: f64,
        signal_um: f64,
        length_mm: f64,
        tau_ps: f64,
        grating: Grating,
        fwhm_nm: Vec<f64>,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Jsa { .. } => "jsa",
            Task::Optimize { .. } => "optimize",
            Task::Atlas { .. } => "atlas",
            Task::Gvm { .. } => "gvm",
            Task::Cddc { .. } => "cddc",
            Task::Bulk { .. } => "bulk",
            Task::Filter { .. } => "filter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub crystal: String,
    pub pols: String,
    pub temperature_c: f64,
    /// Crystal data file; `None` selects the built-in data.
    pub data: Option<String>,
    pub format: Format,
    pub grid: usize,
    pub image: bool,
    pub task: Task,
}
