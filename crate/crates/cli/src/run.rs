//! Executes a resolved configuration, writing every output under one
//! directory together with its manifest.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use pairsource::io::{self, Manifest};
use pairsource::qpm::{bulk_phasematch_locus, first_order_grating, Grating, SpdcProcess};
use pairsource::search::{
    cddc_at_pump, cddc_search, degenerate_gvm_point, degenerate_scan, filter_scan, optimize_tau_l, pump_grid,
    purity_atlas, report_at, Bounds, OptimizeSettings,
};
use pairsource::spectrum::{build_component, build_jsa, dispersion_parameter, JsaComponent};
use pairsource::{
    Crystal, CrystalName, CrystalSet, Error, GridSpec, JointSpectrum, PolarizationConfig, PumpPulse, Result,
    SpectrumMode,
};

use crate::config::{Format, PumpRange, RunConfig, Task};
use crate::image::write_pgm;

pub const TOOL: &str = "pairsource";

pub struct Outcome {
    pub files: Vec<String>,
    pub summary: Vec<String>,
}

struct Context<'a> {
    config: &'a RunConfig,
    crystal: Arc<Crystal>,
    pols: PolarizationConfig,
    dir: &'a Path,
    files: Vec<String>,
    summary: Vec<String>,
}

pub fn load_data(data: Option<&str>) -> Result<CrystalSet> {
    match data {
        Some(path) => CrystalSet::load(path),
        None => Ok(CrystalSet::default_set()),
    }
}

/// Runs `config`, writing outputs and `manifest.json` into `dir`.
pub fn execute(config: &RunConfig, dir: &Path) -> Result<Outcome> {
    let set = load_data(config.data.as_deref())?;
    let name: CrystalName = config.crystal.parse()?;
    let crystal = set.require(name)?;
    let pols: PolarizationConfig = config.pols.parse()?;
    if config.grid < 8 {
        return Err(Error::Validation(format!(
            "grid must have at least 8 points, got {}",
            config.grid
        )));
    }
    let mut ctx = Context {
        config,
        crystal,
        pols,
        dir,
        files: Vec::new(),
        summary: Vec::new(),
    };
    ctx.dispatch()?;

    let mut manifest = Manifest {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: config.task.name().into(),
        config: serde_json::to_value(config).map_err(|e| Error::Parse(e.to_string()))?,
        crystal_data: config.data.clone().unwrap_or_else(|| "builtin".into()),
        crystal_data_sha256: set.digest().into(),
        outputs: Vec::new(),
    };
    manifest.digest_outputs(dir, &ctx.files)?;
    manifest.write(dir)?;
    Ok(Outcome {
        files: ctx.files,
        summary: ctx.summary,
    })
}

impl Context<'_> {
    fn t(&self) -> f64 {
        self.config.temperature_c
    }

    fn grid(&self) -> GridSpec {
        GridSpec::square(self.config.grid)
    }

    fn text(&mut self, file: String, contents: &str) -> Result<()> {
        io::write_text(&self.dir.join(&file), contents)?;
        self.files.push(file);
        Ok(())
    }

    /// Writes rows as `<stem>.csv`, or `<stem>.json` under `--format json`.
    fn table<T: Serialize>(&mut self, stem: &str, rows: &[T]) -> Result<()> {
        match self.config.format {
            Format::Json => self.text(format!("{stem}.json"), &io::to_json(rows)?),
            Format::Csv | Format::Matrix => self.text(format!("{stem}.csv"), &io::to_csv(rows)?),
        }
    }

    fn json<T: Serialize + ?Sized>(&mut self, stem: &str, value: &T) -> Result<()> {
        self.text(format!("{stem}.json"), &io::to_json(value)?)
    }

    fn spectrum(&mut self, stem: &str, js: &JointSpectrum, mode: SpectrumMode) -> Result<()> {
        let files = io::write_spectrum(self.dir, stem, js, mode)?;
        self.files.extend(files);
        Ok(())
    }

    fn image(&mut self, stem: &str, js: &JointSpectrum) -> Result<()> {
        if self.config.image {
            let file = format!("{stem}.pgm");
            write_pgm(&self.dir.join(&file), js)?;
            self.files.push(file);
        }
        Ok(())
    }

    fn process(&self, pump_um: f64, signal_um: f64, grating: Grating, length_mm: f64) -> Result<SpdcProcess> {
        SpdcProcess::new(
            self.crystal.clone(),
            self.pols,
            pump_um,
            signal_um,
            self.t(),
            grating,
            length_mm,
        )
    }

    fn pumps(range: &PumpRange) -> Result<Vec<f64>> {
        if !(range.step_um > 0.0 && range.stop_um >= range.start_um && range.start_um > 0.0) {
            return Err(Error::Validation(format!(
                "pump range needs 0 < start <= stop and step > 0, got {}..{} step {}",
                range.start_um, range.stop_um, range.step_um
            )));
        }
        Ok(pump_grid(range.start_um, range.stop_um, range.step_um))
    }

    fn dispatch(&mut self) -> Result<()> {
        match self.config.task.clone() {
            Task::Jsa {
                pump_um,
                signal_um,
                length_mm,
                tau_ps,
                grating,
                components,
            } => self.jsa(pump_um, signal_um, length_mm, tau_ps, grating, components),
            Task::Optimize {
                pump_um,
                signal_um,
                grating,
                mode,
                bounds,
                settings,
                surface_points,
                components,
            } => self.optimize(
                pump_um,
                signal_um,
                grating,
                mode,
                &bounds,
                &settings,
                surface_points,
                components,
            ),
            Task::Atlas { pumps, settings } => {
                let pumps = Self::pumps(&pumps)?;
                let rows = purity_atlas(&self.crystal, self.pols, &pumps, self.t(), &settings)?;
                self.summary.push(format!(
                    "{} pump wavelengths scanned, {} pure intervals (K_JSI <= 1.01)",
                    pumps.len(),
                    rows.len()
                ));
                self.table("atlas", &rows)
            }
            Task::Gvm { scan, bounds, settings } => self.gvm(scan, &bounds, &settings),
            Task::Cddc { pump_um, settings } => {
                let rows = match pump_um {
                    Some(p) => cddc_at_pump(&self.crystal, self.pols, p, self.t(), &settings)?,
                    None => cddc_search(&self.crystal, self.pols, self.t(), &settings)?,
                };
                for r in rows.iter().filter(|_| pump_um.is_some()) {
                    self.summary.push(format!(
                        "pump {:.1} nm -> blue {:.1} nm + red {:.1} nm, period {:.2} um",
                        r.pump_um * 1000.0,
                        r.blue_um * 1000.0,
                        r.red_um * 1000.0,
                        r.period_um
                    ));
                }
                self.summary.push(format!("{} configurations", rows.len()));
                self.table("cddc", &rows)
            }
            Task::Bulk {
                pumps,
                optimize_pump_um,
                bounds,
                settings,
            } => self.bulk(&pumps, optimize_pump_um, &bounds, &settings),
            Task::Filter {
                pump_um,
                signal_um,
                length_mm,
                tau_ps,
                grating,
                fwhm_nm,
            } => {
                let p = self.process(pump_um, signal_um, grating, length_mm)?;
                let js = build_jsa(&p, &PumpPulse::new(pump_um, tau_ps)?, &self.grid())?;
                let rows = filter_scan(&js, &fwhm_nm)?;
                for r in &rows {
                    self.summary.push(format!(
                        "filter {:>6.2} nm: P {:.4}, transmitted {:.3}",
                        r.filter_fwhm_nm, r.purity, r.transmitted_fraction
                    ));
                }
                self.table("filter", &rows)
            }
        }
    }

    fn jsa(
        &mut self,
        pump_um: f64,
        signal_um: f64,
        length_mm: f64,
        tau_ps: f64,
        grating: Grating,
        components: bool,
    ) -> Result<()> {
        let p = self.process(pump_um, signal_um, grating, length_mm)?;
        let pump = PumpPulse::new(pump_um, tau_ps)?;
        let js = build_jsa(&p, &pump, &self.grid())?;
        self.spectrum_outputs(&p, &pump, &js, components)
    }

    fn spectrum_outputs(
        &mut self,
        p: &SpdcProcess,
        pump: &PumpPulse,
        js: &JointSpectrum,
        components: bool,
    ) -> Result<()> {
        let report = pairsource::SchmidtReport::from_spectrum(js)?;
        self.summary.push(format!(
            "P {:.4}  K {:.4}  K_JSI {:.4}  signal FWHM {:.3} nm  idler FWHM {:.3} nm",
            report.purity,
            report.schmidt_number,
            report.schmidt_number_jsi,
            report.signal_fwhm_nm,
            report.idler_fwhm_nm
        ));
        if let Some(v) = report.hom_visibility {
            self.summary.push(format!("HOM visibility bound {v:.4}"));
        }
        self.spectrum("jsa", js, SpectrumMode::Amplitude)?;
        self.spectrum("jsi", js, SpectrumMode::Intensity)?;
        self.image("jsi", js)?;
        let m = js.marginals();
        let rows: Vec<MarginalRow> = js
            .signal_axis()
            .iter()
            .zip(&m.signal)
            .map(|(&l, &v)| MarginalRow {
                arm: "signal",
                wavelength_um: l,
                intensity: v,
            })
            .chain(js.idler_axis().iter().zip(&m.idler).map(|(&l, &v)| MarginalRow {
                arm: "idler",
                wavelength_um: l,
                intensity: v,
            }))
            .collect();
        self.table("marginals", &rows)?;
        self.json("report", &report)?;
        if components {
            for (stem, c) in [
                ("pump_envelope", JsaComponent::PumpEnvelope),
                ("phase_matching", JsaComponent::PhaseMatching),
            ] {
                let part = build_component(p, pump, &self.grid(), c)?;
                self.spectrum(stem, &part, SpectrumMode::Amplitude)?;
                self.image(stem, &part)?;
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn optimize(
        &mut self,
        pump_um: f64,
        signal_um: f64,
        grating: Grating,
        mode: SpectrumMode,
        bounds: &Bounds,
        settings: &OptimizeSettings,
        surface_points: usize,
        components: bool,
    ) -> Result<()> {
        let p = self.process(pump_um, signal_um, grating, 10.0)?;
        let opt = optimize_tau_l(&p, bounds, mode, settings)?;
        self.summary.push(format!(
            "optimum tau {:.4} ps, L {:.3} mm, objective {:.5}{}",
            opt.tau_ps,
            opt.length_mm,
            opt.objective,
            if opt.flat { " (flat objective)" } else { "" }
        ));
        self.json("optimum", &opt)?;
        let best = p.with_length(opt.length_mm)?;
        let pump = PumpPulse::new(pump_um, opt.tau_ps)?;
        let js = build_jsa(&best, &pump, &self.grid())?;
        self.spectrum_outputs(&best, &pump, &js, components)?;
        if surface_points >= 2 {
            let n = surface_points;
            let log_space =
                |(a, b): (f64, f64), k: usize| (a.ln() + (b.ln() - a.ln()) * k as f64 / (n - 1) as f64).exp();
            let mut rows = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let (tau_ps, length_mm) = (log_space(bounds.tau_ps, i), log_space(bounds.length_mm, j));
                    let r = report_at(&p, tau_ps, length_mm, settings.grid_points)?;
                    rows.push(SurfaceRow {
                        tau_ps,
                        length_mm,
                        purity: r.purity,
                        schmidt_number_jsi: r.schmidt_number_jsi,
                    });
                }
            }
            self.table("surface", &rows)?;
        }
        Ok(())
    }

    fn gvm(&mut self, scan: Option<PumpRange>, bounds: &Bounds, settings: &OptimizeSettings) -> Result<()> {
        if self.pols != PolarizationConfig::TYPE_II {
            return Err(Error::Validation(format!(
                "gvm works on o:oe downconversion, got {}",
                self.pols.short()
            )));
        }
        let point = degenerate_gvm_point(&self.crystal, self.t())?;
        let d = dispersion_parameter(&self.crystal, self.pols, point, 2.0 * point, 2.0 * point, self.t());
        self.summary.push(format!(
            "degenerate group-velocity matching at pump {:.2} nm (D = {:.4})",
            point * 1000.0,
            d.canonical
        ));
        self.json(
            "gvm",
            &GvmRecord {
                crystal: self.crystal.name.as_str(),
                temperature_c: self.t(),
                pump_um: point,
                daughters_um: 2.0 * point,
                dispersion_parameter: d.canonical,
            },
        )?;
        if let Some(range) = scan {
            let pumps = Self::pumps(&range)?;
            let rows = degenerate_scan(&self.crystal, &pumps, self.t(), bounds, settings)?;
            self.table("degenerate_scan", &rows)?;
        }
        Ok(())
    }

    fn bulk(
        &mut self,
        range: &PumpRange,
        optimize_pump_um: Option<f64>,
        bounds: &Bounds,
        settings: &OptimizeSettings,
    ) -> Result<()> {
        let pumps = Self::pumps(range)?;
        let rows: Vec<LocusRow> = bulk_phasematch_locus(&self.crystal, self.pols, &pumps, self.t())
            .into_iter()
            .map(|(p, s)| LocusRow {
                pump_um: p,
                signal_um: s,
                idler_um: pairsource::units::idler_wavelength(p, s),
            })
            .collect();
        self.summary.push(format!("{} bulk phase-matched points", rows.len()));
        if let Some(degenerate) = rows.iter().min_by(|a, b| {
            (a.signal_um - a.idler_um)
                .abs()
                .total_cmp(&(b.signal_um - b.idler_um).abs())
        }) {
            self.summary.push(format!(
                "closest to degeneracy: pump {:.1} nm -> {:.1} + {:.1} nm",
                degenerate.pump_um * 1000.0,
                degenerate.signal_um * 1000.0,
                degenerate.idler_um * 1000.0
            ));
        }
        self.table("locus", &rows)?;
        if let Some(lp) = optimize_pump_um {
            let signals =
                pairsource::qpm::solve_signal_wavelengths(&self.crystal, self.pols, lp, Grating::Bulk, self.t());
            let Some(&ls) = signals
                .iter()
                .min_by(|a, b| (*a - 2.0 * lp).abs().total_cmp(&(*b - 2.0 * lp).abs()))
            else {
                return Err(Error::Validation(format!(
                    "no bulk phase matching at pump {:.2} nm",
                    lp * 1000.0
                )));
            };
            let p = SpdcProcess::new(self.crystal.clone(), self.pols, lp, ls, self.t(), Grating::Bulk, 10.0)?;
            let opt = optimize_tau_l(&p, bounds, SpectrumMode::Amplitude, settings)?;
            self.summary.push(format!(
                "bulk pump {:.1} nm -> {:.1} nm: P {:.4} at tau {:.3} ps, L {:.2} mm",
                lp * 1000.0,
                ls * 1000.0,
                opt.report.purity,
                opt.tau_ps,
                opt.length_mm
            ));
            self.json(
                "bulk_optimum",
                &BulkOptimum {
                    signal_um: ls,
                    optimum: &opt,
                },
            )?;
        }
        Ok(())
    }
}

/// First-order grating for the wavelengths, or the explicit choice.
pub fn resolve_grating(
    set: &CrystalSet,
    crystal: &str,
    pols: &str,
    pump_um: f64,
    signal_um: f64,
    temperature_c: f64,
    period: Option<f64>,
    order: Option<i32>,
    bulk: bool,
) -> Result<Grating> {
    if bulk {
        return Ok(Grating::Bulk);
    }
    let crystal = set.require(crystal.parse()?)?;
    let pols: PolarizationConfig = pols.parse()?;
    match period {
        Some(period_um) if period_um > 0.0 => {
            let order = match order {
                Some(o) => o,
                None => match first_order_grating(&crystal, pols, pump_um, signal_um, temperature_c)? {
                    Grating::Period { order, .. } => order,
                    Grating::Bulk => 1,
                },
            };
            if order % 2 == 0 {
                return Err(Error::Validation(format!("QPM order must be odd, got {order}")));
            }
            Ok(Grating::Period { period_um, order })
        }
        Some(p) => Err(Error::Validation(format!("poling period must be positive, got {p}"))),
        None => first_order_grating(&crystal, pols, pump_um, signal_um, temperature_c),
    }
}

#[derive(Serialize)]
struct MarginalRow {
    arm: &'static str,
    wavelength_um: f64,
    intensity: f64,
}

#[derive(Serialize)]
struct SurfaceRow {
    tau_ps: f64,
    length_mm: f64,
    purity: f64,
    schmidt_number_jsi: f64,
}

#[derive(Serialize)]
struct GvmRecord {
    crystal: &'static str,
    temperature_c: f64,
    pump_um: f64,
    daughters_um: f64,
    dispersion_parameter: f64,
}

#[derive(Serialize)]
struct LocusRow {
    pump_um: f64,
    signal_um: f64,
    idler_um: f64,
}

#[derive(Serialize)]
struct BulkOptimum<'a> {
    signal_um: f64,
    optimum: &'a pairsource::search::TauLOptimum,
}
