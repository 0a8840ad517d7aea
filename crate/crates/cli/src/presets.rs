//! Figure presets: each maps a figure number (or its name) to the runs that
//! produce its data.

use pairsource::qpm::first_order_grating;
use pairsource::search::{AtlasSettings, Bounds, CddcSettings, OptimizeSettings};
use pairsource::{CrystalName, CrystalSet, PolarizationConfig, Result, SpectrumMode};

use crate::config::{Format, PumpRange, RunConfig, Task};

pub struct Preset {
    pub number: u32,
    pub name: &'static str,
    pub description: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        number: 1,
        name: "gvm-examples",
        description: "KTP JSA and its factors at D = 1 (791 nm) and D = 0 (612 nm)",
    },
    Preset {
        number: 2,
        name: "purity-surface",
        description: "KTP 791 nm purity over pulse duration and length",
    },
    Preset {
        number: 3,
        name: "jsa-jsi",
        description: "KTP 791 nm, 30 mm, 2.5 ps amplitude and intensity",
    },
    Preset {
        number: 4,
        name: "filtering",
        description: "KTP 791 nm bandpass filter scan",
    },
    Preset {
        number: 5,
        name: "ktp-eee",
        description: "type-0 purity atlas, KTP",
    },
    Preset {
        number: 6,
        name: "cta-eee",
        description: "type-0 purity atlas, CTA",
    },
    Preset {
        number: 7,
        name: "kta-eee",
        description: "type-0 purity atlas, KTA",
    },
    Preset {
        number: 8,
        name: "rta-eee",
        description: "type-0 purity atlas, RTA",
    },
    Preset {
        number: 9,
        name: "rtp-eee",
        description: "type-0 purity atlas, RTP",
    },
    Preset {
        number: 10,
        name: "ktp-ooe",
        description: "type-II purity atlas, KTP",
    },
    Preset {
        number: 11,
        name: "cta-ooe",
        description: "type-II purity atlas, CTA",
    },
    Preset {
        number: 12,
        name: "kta-ooe",
        description: "type-II purity atlas, KTA",
    },
    Preset {
        number: 13,
        name: "rta-ooe",
        description: "type-II purity atlas, RTA",
    },
    Preset {
        number: 14,
        name: "rtp-ooe",
        description: "type-II purity atlas, RTP",
    },
    Preset {
        number: 15,
        name: "degenerate-ktp",
        description: "degenerate type-II purity and HOM scan, KTP",
    },
    Preset {
        number: 16,
        name: "degenerate-others",
        description: "degenerate type-II scans, CTA, KTA, RTA, RTP",
    },
    Preset {
        number: 17,
        name: "cta-nopoling",
        description: "bulk phase-matching locus and 775 nm optimum, CTA",
    },
    Preset {
        number: 18,
        name: "others-nopoling",
        description: "bulk phase-matching loci, KTP, KTA, RTA, RTP",
    },
    Preset {
        number: 19,
        name: "cta-cddc",
        description: "CDDC configurations and the 772.5 nm point, CTA",
    },
    Preset {
        number: 20,
        name: "others-cddc",
        description: "CDDC configurations, KTP (with 532.3 nm), KTA, RTA, RTP",
    },
];

pub fn find(key: &str) -> Option<&'static Preset> {
    let key = key.trim().to_ascii_lowercase();
    PRESETS
        .iter()
        .find(|p| key.parse::<u32>().map_or(false, |n| n == p.number) || p.name == key)
}

const ATLAS_PUMPS: PumpRange = PumpRange {
    start_um: 0.4,
    stop_um: 1.6,
    step_um: 0.005,
};

const DEGENERATE_PUMPS: PumpRange = PumpRange {
    start_um: 0.6,
    stop_um: 1.1,
    step_um: 0.01,
};

const BULK_PUMPS: PumpRange = PumpRange {
    start_um: 0.6,
    stop_um: 1.4,
    step_um: 0.002,
};

/// Runs of a preset as (output subdirectory, configuration).
pub fn runs(
    preset: &Preset,
    set: &CrystalSet,
    data: Option<String>,
    grid: usize,
    format: Format,
    image: bool,
) -> Result<Vec<(String, RunConfig)>> {
    let temperature = |name: CrystalName| -> Result<f64> {
        Ok(if name == CrystalName::Ktp {
            50.0
        } else {
            set.require(name)?.reference_temperature_c
        })
    };
    let config = |name: CrystalName, pols: PolarizationConfig, task: Task| -> Result<RunConfig> {
        Ok(RunConfig {
            crystal: name.as_str().into(),
            pols: pols.short(),
            temperature_c: temperature(name)?,
            data: data.clone(),
            format,
            grid,
            image,
            task,
        })
    };
    let type_ii = PolarizationConfig::TYPE_II;
    let type_0: PolarizationConfig = "e:ee".parse()?;
    let ktp = CrystalName::Ktp;
    let grating = |lp: f64| -> Result<_> { first_order_grating(&*set.require(ktp)?, type_ii, lp, 2.0 * lp, 50.0) };
    let ktp_jsa = |components| -> Result<Task> {
        Ok(Task::Jsa {
            pump_um: 0.791,
            signal_um: 1.582,
            length_mm: 30.0,
            tau_ps: 2.5,
            grating: grating(0.791)?,
            components,
        })
    };
    let optimize = |lp: f64, surface_points, components| -> Result<Task> {
        Ok(Task::Optimize {
            pump_um: lp,
            signal_um: 2.0 * lp,
            grating: grating(lp)?,
            mode: SpectrumMode::Amplitude,
            bounds: Bounds::default(),
            settings: OptimizeSettings::default(),
            surface_points,
            components,
        })
    };
    let atlas = || Task::Atlas {
        pumps: ATLAS_PUMPS,
        settings: AtlasSettings::default(),
    };
    let all_but_cta = [CrystalName::Ktp, CrystalName::Kta, CrystalName::Rta, CrystalName::Rtp];
    let dir = |name: CrystalName| name.as_str().to_ascii_lowercase();

    let mut out = Vec::new();
    match preset.number {
        1 => {
            out.push(("d1-791nm".into(), config(ktp, type_ii, ktp_jsa(true)?)?));
            out.push(("d0-612nm".into(), config(ktp, type_ii, optimize(0.612, 0, true)?)?));
        }
        2 => out.push((String::new(), config(ktp, type_ii, optimize(0.791, 40, false)?)?)),
        3 => {
            let mut c = config(ktp, type_ii, ktp_jsa(false)?)?;
            c.image = true;
            out.push((String::new(), c));
        }
        4 => {
            let fwhm_nm = vec![1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0];
            let Task::Jsa {
                pump_um,
                signal_um,
                length_mm,
                tau_ps,
                grating,
                ..
            } = ktp_jsa(false)?
            else {
                unreachable!()
            };
            let task = Task::Filter {
                pump_um,
                signal_um,
                length_mm,
                tau_ps,
                grating,
                fwhm_nm,
            };
            out.push((String::new(), config(ktp, type_ii, task)?));
        }
        n @ 5..=14 => {
            let name = CrystalName::ALL[((n - 5) % 5) as usize];
            let pols = if n < 10 { type_0 } else { type_ii };
            out.push((String::new(), config(name, pols, atlas())?));
        }
        15 | 16 => {
            let names: &[CrystalName] = if preset.number == 15 {
                &[CrystalName::Ktp]
            } else {
                &[CrystalName::Cta, CrystalName::Kta, CrystalName::Rta, CrystalName::Rtp]
            };
            for &name in names {
                let task = Task::Gvm {
                    scan: Some(DEGENERATE_PUMPS),
                    bounds: Bounds::default(),
                    settings: OptimizeSettings::default(),
                };
                out.push((dir(name), config(name, type_ii, task)?));
            }
        }
        17 => {
            let task = Task::Bulk {
                pumps: BULK_PUMPS,
                optimize_pump_um: Some(0.775),
                bounds: Bounds::default(),
                settings: OptimizeSettings::default(),
            };
            out.push((String::new(), config(CrystalName::Cta, type_ii, task)?));
        }
        18 => {
            for name in all_but_cta {
                let task = Task::Bulk {
                    pumps: BULK_PUMPS,
                    optimize_pump_um: None,
                    bounds: Bounds::default(),
                    settings: OptimizeSettings::default(),
                };
                out.push((dir(name), config(name, type_ii, task)?));
            }
        }
        19 => {
            let cta = CrystalName::Cta;
            out.push((
                "search".into(),
                config(
                    cta,
                    type_ii,
                    Task::Cddc {
                        pump_um: None,
                        settings: CddcSettings::default(),
                    },
                )?,
            ));
            out.push((
                "772.5nm".into(),
                config(
                    cta,
                    type_ii,
                    Task::Cddc {
                        pump_um: Some(0.7725),
                        settings: CddcSettings::default(),
                    },
                )?,
            ));
        }
        20 => {
            for name in all_but_cta {
                out.push((
                    dir(name),
                    config(
                        name,
                        type_ii,
                        Task::Cddc {
                            pump_um: None,
                            settings: CddcSettings::default(),
                        },
                    )?,
                ));
            }
            out.push((
                "ktp-532.3nm".into(),
                config(
                    ktp,
                    type_ii,
                    Task::Cddc {
                        pump_um: Some(0.5323),
                        settings: CddcSettings::default(),
                    },
                )?,
            ));
        }
        _ => unreachable!("preset numbers are fixed"),
    }
    Ok(out)
}
