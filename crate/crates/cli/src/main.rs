//! Command-line front end. Every command writes its outputs and a
//! `manifest.json` into the output directory; `rerun` replays a manifest.

mod config;
mod image;
mod presets;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use pairsource::io::{Manifest, MANIFEST_FILE};
use pairsource::search::{AtlasSettings, Bounds, CddcSettings, OptimizeSettings};
use pairsource::{CrystalName, CrystalSet, Error, SpectrumMode};

use config::{Format, PumpRange, RunConfig, Task};

const DEFAULT_OUT: &str = "out";

/// Prints a line to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

/// Photon-pair source design for periodically poled KTP-family crystals.
///
/// Wavelengths are given in µm on input. Summaries print nm.
#[derive(Debug, Parser)]
#[command(name = "pairsource", version, about)]
struct Cli {
    /// Crystal: KTP, CTA, KTA, RTA or RTP (a "pp" prefix is accepted).
    #[arg(long, global = true)]
    crystal: Option<String>,
    /// Polarizations as pump:signal+idler axes, e.g. o:oe.
    #[arg(long, global = true, default_value = "o:oe")]
    pols: String,
    /// Crystal temperature in °C. Defaults to the data file's reference temperature.
    #[arg(long, global = true)]
    temp: Option<f64>,
    /// Crystal data file (TOML). Defaults to the built-in data.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of tabular outputs. Spectra are always written as matrix text.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Grid points per axis for joint spectra.
    #[arg(long, global = true, default_value_t = 512)]
    grid: usize,
    /// Deterministic mode. Every command is deterministic; the flag is accepted for scripts.
    #[arg(long, global = true)]
    seedless: bool,
    /// Also write PGM images of joint intensities.
    #[arg(long, global = true)]
    image: bool,
    /// Reproduce the data of a figure preset, by number (1-20) or name.
    #[arg(long)]
    figure: Option<String>,
    /// List the figure presets.
    #[arg(long)]
    list_figures: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Args)]
struct GratingArgs {
    /// Poling period in µm. Defaults to the first-order period for the wavelengths.
    #[arg(long, conflicts_with = "bulk")]
    period: Option<f64>,
    /// QPM order (odd, signed). Defaults to the sign that phase-matches.
    #[arg(long, requires = "period", allow_hyphen_values = true)]
    order: Option<i32>,
    /// Unpoled crystal.
    #[arg(long)]
    bulk: bool,
}

#[derive(Debug, Args)]
struct ProcessArgs {
    /// Pump wavelength, µm.
    #[arg(long)]
    pump: f64,
    /// Signal wavelength, µm. Defaults to twice the pump.
    #[arg(long)]
    signal: Option<f64>,
    #[command(flatten)]
    grating: GratingArgs,
}

#[derive(Debug, Args)]
struct PumpRangeArgs {
    /// First pump wavelength, µm.
    #[arg(long)]
    pump_start: Option<f64>,
    /// Last pump wavelength, µm.
    #[arg(long)]
    pump_stop: Option<f64>,
    /// Pump step, µm.
    #[arg(long)]
    pump_step: Option<f64>,
}

impl PumpRangeArgs {
    fn resolve(&self, default: PumpRange) -> PumpRange {
        PumpRange {
            start_um: self.pump_start.unwrap_or(default.start_um),
            stop_um: self.pump_stop.unwrap_or(default.stop_um),
            step_um: self.pump_step.unwrap_or(default.step_um),
        }
    }

    fn given(&self) -> bool {
        self.pump_start.is_some() || self.pump_stop.is_some() || self.pump_step.is_some()
    }
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Shortest pump pulse, ps.
    #[arg(long, default_value_t = 0.05)]
    tau_min: f64,
    /// Longest pump pulse, ps.
    #[arg(long, default_value_t = 50.0)]
    tau_max: f64,
    /// Shortest crystal, mm.
    #[arg(long, default_value_t = 0.5)]
    length_min: f64,
    /// Longest crystal, mm.
    #[arg(long, default_value_t = 50.0)]
    length_max: f64,
}

impl BoundsArgs {
    fn resolve(&self) -> Bounds {
        Bounds {
            tau_ps: (self.tau_min, self.tau_max),
            length_mm: (self.length_min, self.length_max),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Amplitude,
    Intensity,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Joint spectral amplitude and intensity with their Schmidt report.
    Jsa {
        #[command(flatten)]
        process: ProcessArgs,
        /// Crystal length, mm.
        #[arg(long = "L", visible_alias = "length")]
        length: f64,
        /// Pump pulse duration (intensity FWHM), ps.
        #[arg(long)]
        tau: f64,
        /// Also write the pump-envelope and phase-matching factors.
        #[arg(long)]
        components: bool,
    },
    /// Pulse duration and crystal length that maximize purity.
    Optimize {
        #[command(flatten)]
        process: ProcessArgs,
        /// Purity of the amplitude or of the intensity.
        #[arg(long, value_enum, default_value_t = ModeArg::Amplitude)]
        mode: ModeArg,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Also write an N x N purity surface over the bounds.
        #[arg(long, default_value_t = 0)]
        surface: usize,
        #[arg(long)]
        components: bool,
    },
    /// Signal intervals with K_JSI <= 1.01 for each pump wavelength.
    Atlas {
        #[command(flatten)]
        pumps: PumpRangeArgs,
        /// Signal samples per pump wavelength.
        #[arg(long, default_value_t = 2000)]
        signal_samples: usize,
    },
    /// Pump wavelength of degenerate group-velocity matching, optionally with a purity scan.
    Gvm {
        /// Scan degenerate purity and HOM visibility over this pump range.
        #[command(flatten)]
        scan: PumpRangeArgs,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Collinear double downconversion configurations.
    Cddc {
        /// Solve at one pump wavelength (µm) instead of sweeping periods.
        #[arg(long)]
        pump: Option<f64>,
        /// Shortest poling period, µm.
        #[arg(long, default_value_t = 5.0)]
        period_min: f64,
        /// Longest poling period, µm.
        #[arg(long, default_value_t = 2000.0)]
        period_max: f64,
        /// Log-spaced period samples.
        #[arg(long, default_value_t = 200)]
        period_samples: usize,
        /// Crystal length for the bandwidth estimates, mm.
        #[arg(long = "L", visible_alias = "length", default_value_t = 10.0)]
        length: f64,
    },
    /// Bulk (unpoled) phase-matching locus.
    Bulk {
        #[command(flatten)]
        pumps: PumpRangeArgs,
        /// Optimize purity at this pump wavelength (µm) on the locus branch closest to degeneracy.
        #[arg(long)]
        optimize_at: Option<f64>,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Purity, HOM visibility and transmission under Gaussian bandpass filters.
    Filter {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long = "L", visible_alias = "length")]
        length: f64,
        #[arg(long)]
        tau: f64,
        /// Filter intensity FWHMs, nm, comma-separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 20.0])]
        fwhm: Vec<f64>,
    },
    /// Replay a manifest and check the outputs reproduce byte for byte.
    Rerun {
        /// Path to a manifest.json.
        manifest: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Core(Error),
    Mismatch(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(Error::NonConvergence(_) | Error::NoGvmPoint) => 4,
            Failure::Core(_) | Failure::Mismatch(_) => 3,
        }
    }

    fn message(&self) -> String {
        let text = match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
            Failure::Mismatch(files) => format!("rerun differs from manifest in: {}", files.join(", ")),
        };
        text.replace('\n', " ")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    if cli.list_figures {
        for p in presets::PRESETS {
            say!("{:>2}  {:<18} {}", p.number, p.name, p.description);
        }
        return Ok(());
    }
    let data = cli.data.as_ref().map(|p| p.display().to_string());
    let set = run::load_data(data.as_deref())?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    if let Some(key) = &cli.figure {
        if cli.command.is_some() {
            return Err(Failure::Usage("--figure cannot be combined with a subcommand".into()));
        }
        let preset = presets::find(key).ok_or_else(|| Failure::Usage(format!("unknown figure preset {key:?}")))?;
        let dir = out.join(format!("fig{:02}-{}", preset.number, preset.name));
        for (sub, config) in presets::runs(preset, &set, data, cli.grid, cli.format, cli.image)? {
            let target = if sub.is_empty() { dir.clone() } else { dir.join(sub) };
            execute(&config, &target)?;
        }
        return Ok(());
    }

    let Some(command) = &cli.command else {
        let mut cmd = Cli::command();
        return Err(Failure::Usage(cmd.render_usage().to_string()));
    };
    if let Command::Rerun { manifest } = command {
        return rerun(manifest, cli.out.as_deref());
    }
    let config = resolve(&cli, command, &set, data)?;
    execute(&config, &out)
}

fn execute(config: &RunConfig, dir: &Path) -> Result<(), Failure> {
    let outcome = run::execute(config, dir)?;
    say!(
        "{} {} -> {} ({} files)",
        config.task.name(),
        config.crystal,
        dir.display(),
        outcome.files.len()
    );
    for line in outcome.summary {
        say!("  {line}");
    }
    Ok(())
}

fn rerun(manifest_path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let manifest = Manifest::load(manifest_path)?;
    let config: RunConfig = serde_json::from_value(manifest.config.clone())
        .map_err(|e| Error::Parse(format!("{}: {e}", manifest_path.display())))?;
    let set = run::load_data(config.data.as_deref())?;
    if set.digest() != manifest.crystal_data_sha256 {
        return Err(Error::Validation(format!(
            "crystal data {} has changed since the manifest was written",
            manifest.crystal_data
        ))
        .into());
    }
    let dir = match out {
        Some(dir) => dir.to_path_buf(),
        None => manifest_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    execute(&config, &dir)?;
    let rerun = Manifest::load(&dir.join(MANIFEST_FILE))?;
    let differing: Vec<String> = manifest
        .outputs
        .iter()
        .filter(|o| !rerun.outputs.contains(o))
        .map(|o| o.file.clone())
        .collect();
    if differing.is_empty() {
        say!("  reproduced {} files", manifest.outputs.len());
        Ok(())
    } else {
        Err(Failure::Mismatch(differing))
    }
}

fn resolve(cli: &Cli, command: &Command, set: &CrystalSet, data: Option<String>) -> Result<RunConfig, Failure> {
    let crystal_arg = cli
        .crystal
        .as_deref()
        .ok_or_else(|| Failure::Usage("--crystal is required (KTP, CTA, KTA, RTA or RTP)".into()))?;
    let name: CrystalName = crystal_arg.parse()?;
    let crystal = set.require(name)?;
    let temperature_c = cli.temp.unwrap_or(crystal.reference_temperature_c);
    let pols = cli.pols.parse::<pairsource::PolarizationConfig>()?.short();
    let crystal_name = name.as_str().to_string();

    let process = |p: &ProcessArgs| -> Result<(f64, f64, pairsource::qpm::Grating), Failure> {
        let signal = p.signal.unwrap_or(2.0 * p.pump);
        let g = &p.grating;
        let grating = run::resolve_grating(
            set,
            &crystal_name,
            &pols,
            p.pump,
            signal,
            temperature_c,
            g.period,
            g.order,
            g.bulk,
        )?;
        Ok((p.pump, signal, grating))
    };

    let task = match command {
        Command::Jsa {
            process: p,
            length,
            tau,
            components,
        } => {
            let (pump_um, signal_um, grating) = process(p)?;
            Task::Jsa {
                pump_um,
                signal_um,
                length_mm: *length,
                tau_ps: *tau,
                grating,
                components: *components,
            }
        }
        Command::Optimize {
            process: p,
            mode,
            bounds,
            surface,
            components,
        } => {
            let (pump_um, signal_um, grating) = process(p)?;
            Task::Optimize {
                pump_um,
                signal_um,
                grating,
                mode: match mode {
                    ModeArg::Amplitude => SpectrumMode::Amplitude,
                    ModeArg::Intensity => SpectrumMode::Intensity,
                },
                bounds: bounds.resolve(),
                settings: OptimizeSettings::default(),
                surface_points: *surface,
                components: *components,
            }
        }
        Command::Atlas { pumps, signal_samples } => Task::Atlas {
            pumps: pumps.resolve(PumpRange {
                start_um: 0.4,
                stop_um: 1.6,
                step_um: 0.005,
            }),
            settings: AtlasSettings {
                signal_samples: *signal_samples,
                ..AtlasSettings::default()
            },
        },
        Command::Gvm { scan, bounds } => Task::Gvm {
            scan: scan.given().then(|| {
                scan.resolve(PumpRange {
                    start_um: 0.6,
                    stop_um: 1.1,
                    step_um: 0.01,
                })
            }),
            bounds: bounds.resolve(),
            settings: OptimizeSettings::default(),
        },
        Command::Cddc {
            pump,
            period_min,
            period_max,
            period_samples,
            length,
        } => Task::Cddc {
            pump_um: *pump,
            settings: CddcSettings {
                period_range_um: (*period_min, *period_max),
                period_samples: *period_samples,
                length_mm: *length,
                ..CddcSettings::default()
            },
        },
        Command::Bulk {
            pumps,
            optimize_at,
            bounds,
        } => Task::Bulk {
            pumps: pumps.resolve(PumpRange {
                start_um: 0.6,
                stop_um: 1.4,
                step_um: 0.002,
            }),
            optimize_pump_um: *optimize_at,
            bounds: bounds.resolve(),
            settings: OptimizeSettings::default(),
        },
        Command::Filter {
            process: p,
            length,
            tau,
            fwhm,
        } => {
            let (pump_um, signal_um, grating) = process(p)?;
            Task::Filter {
                pump_um,
                signal_um,
                length_mm: *length,
                tau_ps: *tau,
                grating,
                fwhm_nm: fwhm.clone(),
            }
        }
        Command::Rerun { .. } => unreachable!("handled before resolution"),
    };
    if cli.format == Format::Matrix && !matches!(task, Task::Jsa { .. } | Task::Optimize { .. }) {
        return Err(Failure::Usage(format!(
            "--format matrix applies to spectra; {} writes tables (use csv or json)",
            task.name()
        )));
    }
    Ok(RunConfig {
        crystal: crystal_name,
        pols,
        temperature_c,
        data,
        format: cli.format,
        grid: cli.grid,
        image: cli.image,
        task,
    })
}
