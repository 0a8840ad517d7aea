//! Acceptance checks. Each test prints one `criterion N: PASS|FAIL ...` line
//! to stderr before asserting.

use std::io::Write;
use std::process::Command;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Instant;

use nalgebra::DMatrix;
use pairsource::qpm::{bare_mismatch, first_order_grating, solve_signal_wavelengths, Grating};
use pairsource::roots::bisect;
use pairsource::search::{
    cddc_at_pump, cddc_search, degenerate_gvm_point, filter_scan, optimize_tau_l, pump_grid, purity_atlas,
    AtlasSettings, Bounds, CddcConfig, CddcSettings, OptimizeSettings,
};
use pairsource::spectrum::{
    build_jsa, dispersion_parameter, schmidt_decompose, GridSpec, JointSpectrum, PumpPulse, C64,
};
use pairsource::units::{energy_residual, idler_wavelength};
use pairsource::{
    Axis, Crystal, CrystalName, CrystalSet, PolarizationConfig, SchmidtReport, SpdcProcess, SpectrumMode,
};

const BIN: &str = env!("CARGO_BIN_EXE_pairsource");
const KTP_T: f64 = 50.0;
const TYPE_II: PolarizationConfig = PolarizationConfig::TYPE_II;

/// Timed criteria run one at a time so runtimes are not shared with other tests.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(n: u32, pass: bool, details: &str) {
    let line = format!("criterion {n}: {} {details}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {n} failed: {details}");
}

fn crystal(name: CrystalName) -> Arc<Crystal> {
    CrystalSet::default_set().get(name).unwrap()
}

fn ktp_791(length_mm: f64) -> SpdcProcess {
    let c = crystal(CrystalName::Ktp);
    let g = first_order_grating(&c, TYPE_II, 0.791, 1.582, KTP_T).unwrap();
    SpdcProcess::new(c, TYPE_II, 0.791, 1.582, KTP_T, g, length_mm).unwrap()
}

fn ktp_791_spectrum(points: usize) -> JointSpectrum {
    build_jsa(
        &ktp_791(30.0),
        &PumpPulse::new(0.791, 2.5).unwrap(),
        &GridSpec::square(points),
    )
    .unwrap()
}

fn within(value: f64, target: f64, tolerance: f64) -> bool {
    (value - target).abs() <= tolerance
}

#[test]
fn criterion_01_group_delays() {
    let _serial = serial();
    let c = crystal(CrystalName::Ktp);
    let cases = [
        (0.791, Axis::O, 6.027),
        (1.582, Axis::O, 5.880),
        (1.582, Axis::E, 6.175),
        (0.612, Axis::O, 6.209),
        (1.224, Axis::O, 6.208),
        (1.224, Axis::E, 5.903),
    ];
    let start = Instant::now();
    let values: Vec<f64> = cases.iter().map(|&(l, a, _)| c.group_delay(a, l, KTP_T)).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let mut pass = elapsed < 0.1;
    let mut details = Vec::new();
    for (&(l, a, expected), gd) in cases.iter().zip(&values) {
        let ok = within(*gd, expected, 0.02);
        pass &= ok;
        let axis = if a == Axis::O { "o" } else { "e" };
        details.push(format!(
            "{:.0}nm {axis} {gd:.3}/{expected}{}",
            l * 1000.0,
            if ok { "" } else { "!" }
        ));
    }
    verdict(
        1,
        pass,
        &format!("{} in {:.1} ms", details.join(", "), elapsed * 1000.0),
    );
}

#[test]
fn criterion_02_dispersion_parameter() {
    let _serial = serial();
    let c = crystal(CrystalName::Ktp);
    let d1 = dispersion_parameter(&c, TYPE_II, 0.791, 1.582, 1.582, KTP_T).canonical;
    let d0 = dispersion_parameter(&c, TYPE_II, 0.612, 1.224, 1.224, KTP_T).canonical;
    let pass = within(d1, 0.993, 0.02) && within(d0, -0.003, 0.02);
    verdict(2, pass, &format!("D(791) {d1:.4} (0.993), D(612) {d0:.4} (-0.003)"));
}

#[test]
fn criterion_03_degenerate_gvm_points() {
    let _serial = serial();
    let cases = [
        (CrystalName::Ktp, 791.0, 3.0),
        (CrystalName::Cta, 932.3, 5.0),
        (CrystalName::Kta, 817.4, 5.0),
        (CrystalName::Rta, 892.3, 5.0),
        (CrystalName::Rtp, 821.6, 5.0),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, expected, tolerance) in cases {
        let c = crystal(name);
        let t = if name == CrystalName::Ktp {
            KTP_T
        } else {
            c.reference_temperature_c
        };
        let start = Instant::now();
        let point = degenerate_gvm_point(&c, t).map(|p| p * 1000.0);
        let elapsed = start.elapsed().as_secs_f64();
        let ok = elapsed < 10.0 && point.as_ref().is_ok_and(|p| within(*p, expected, tolerance));
        pass &= ok;
        let found = point.map_or_else(|e| e.to_string(), |p| format!("{p:.1}"));
        details.push(format!(
            "{} {found}/{expected} ({elapsed:.2} s){}",
            name.as_str(),
            if ok { "" } else { "!" }
        ));
    }
    verdict(3, pass, &details.join(", "));
}

#[test]
fn criterion_04_ktp_791_spectrum() {
    let _serial = serial();
    let start = Instant::now();
    let r = SchmidtReport::from_spectrum(&ktp_791_spectrum(512)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = (0.80..=0.86).contains(&r.purity)
        && (1.15..=1.25).contains(&r.schmidt_number)
        && r.schmidt_number_jsi <= 1.02
        && elapsed < 2.0;
    let details = format!(
        "P {:.4}, K {:.4}, K_JSI {:.4}, 512x512 in {elapsed:.2} s",
        r.purity, r.schmidt_number, r.schmidt_number_jsi
    );
    verdict(4, pass, &details);
}

#[test]
fn criterion_05_filter_scan() {
    let _serial = serial();
    let rows = filter_scan(&ktp_791_spectrum(512), &[4.0]).unwrap();
    let (open, filtered) = (&rows[0], &rows[1]);
    let pass = (0.80..=0.86).contains(&open.purity) && filtered.purity > 0.95 && filtered.transmitted_fraction > 0.80;
    let details = format!(
        "unfiltered P {:.4}; 4 nm: P {:.4}, transmitted {:.3}",
        open.purity, filtered.purity, filtered.transmitted_fraction
    );
    verdict(5, pass, &details);
}

#[test]
fn criterion_06_bulk_cta() {
    let _serial = serial();
    let c = crystal(CrystalName::Cta);
    let t = c.reference_temperature_c;
    let degenerate = |p: f64| bare_mismatch(&c, TYPE_II, p, 2.0 * p, 2.0 * p, t);
    let pumps = pump_grid(0.6, 1.4, 0.002);
    let crossing = pumps
        .windows(2)
        .filter(|w| degenerate(w[0]) * degenerate(w[1]) <= 0.0)
        .filter_map(|w| bisect(degenerate, w[0], w[1], 1e-9))
        .min_by(|a, b| (a - 0.775).abs().total_cmp(&(b - 0.775).abs()));
    let on_locus = crossing.is_some_and(|p| within(p * 1000.0, 775.0, 3.0));

    let signals = solve_signal_wavelengths(&c, TYPE_II, 0.775, Grating::Bulk, t);
    let signal = signals
        .iter()
        .copied()
        .min_by(|a, b| (a - 1.55).abs().total_cmp(&(b - 1.55).abs()));
    let optimum = signal.and_then(|s| {
        let p = SpdcProcess::new(c.clone(), TYPE_II, 0.775, s, t, Grating::Bulk, 10.0).ok()?;
        optimize_tau_l(
            &p,
            &Bounds::default(),
            SpectrumMode::Amplitude,
            &OptimizeSettings::default(),
        )
        .ok()
    });
    let purity = optimum.as_ref().map_or(f64::NAN, |o| o.report.purity);
    let pass = on_locus && within(purity, 0.91, 0.02);
    let details = format!(
        "degenerate bulk pump {}, 775 nm bulk root {} with P {purity:.4} (target 775->1550, P 0.91)",
        crossing.map_or("none".into(), |p| format!("{:.1} nm", p * 1000.0)),
        signal.map_or("none".into(), |s| format!("{:.1} nm", s * 1000.0)),
    );
    verdict(6, pass, &details);
}

fn residuals_ok(rows: &[CddcConfig]) -> bool {
    rows.iter()
        .all(|r| r.residual_first.abs() < 1e-8 && r.residual_second.abs() < 1e-8)
}

#[test]
fn criterion_07_cddc() {
    let _serial = serial();
    let settings = CddcSettings::default();
    let mut pass = true;
    let mut details = Vec::new();

    let ktp = crystal(CrystalName::Ktp);
    let rows = cddc_at_pump(&ktp, TYPE_II, 0.5323, KTP_T, &settings).unwrap();
    let hit = rows
        .iter()
        .find(|r| within(r.blue_um * 1000.0, 904.3, 5.0) && within(r.red_um * 1000.0, 1293.9, 5.0));
    pass &= hit.is_some() && residuals_ok(&rows);
    let found: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.1}+{:.1}", r.blue_um * 1000.0, r.red_um * 1000.0))
        .collect();
    details.push(format!("KTP 532.3 nm -> [{}] (904.3+1293.9)", found.join(", ")));

    let cta = crystal(CrystalName::Cta);
    let rows = cddc_at_pump(&cta, TYPE_II, 0.7725, cta.reference_temperature_c, &settings).unwrap();
    let hit = rows.iter().find(|r| {
        within(r.blue_um * 1000.0, 1505.0, 10.0)
            && within(r.red_um * 1000.0, 1587.0, 10.0)
            && within(r.delta_gd_first, 0.2, 0.05)
            && within(r.delta_gd_second, 0.2, 0.05)
    });
    pass &= hit.is_some() && residuals_ok(&rows);
    let found: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{:.1}+{:.1} dGD {:.3}/{:.3}",
                r.blue_um * 1000.0,
                r.red_um * 1000.0,
                r.delta_gd_first,
                r.delta_gd_second
            )
        })
        .collect();
    details.push(format!("CTA 772.5 nm -> [{}] (1505+1587, dGD 0.2)", found.join(", ")));

    for (name, c, t) in [("KTP", &ktp, KTP_T), ("CTA", &cta, cta.reference_temperature_c)] {
        let start = Instant::now();
        let rows = cddc_search(c, TYPE_II, t, &settings).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        let ok = residuals_ok(&rows) && elapsed < 60.0;
        pass &= ok;
        details.push(format!(
            "{name} search {} rows in {elapsed:.1} s, residuals {}",
            rows.len(),
            if ok { "ok" } else { "FAIL" }
        ));
    }
    verdict(7, pass, &details.join("; "));
}

#[test]
fn criterion_08_effective_nonlinearity() {
    let _serial = serial();
    let set = CrystalSet::default_set();
    let nonzero = [
        ("e:ee", [9.5, 11.2, 9.6, 9.8, 9.6]),
        ("e:oo", [2.4, 2.1, 2.3, 2.4, 2.4]),
        ("o:oe", [2.4, 2.1, 2.3, 2.4, 2.4]),
    ];
    let mut cells = 0;
    let mut mismatches = Vec::new();
    for (k, name) in CrystalName::ALL.iter().enumerate() {
        let c = set.get(*name).unwrap();
        for pols in PolarizationConfig::TABLE_ROWS {
            let expected = nonzero
                .iter()
                .find(|(p, _)| p.parse::<PolarizationConfig>().unwrap() == pols)
                .map_or(0.0, |(_, v)| v[k]);
            cells += 1;
            if c.effective_nonlinearity(pols) != expected {
                mismatches.push(format!("{} {}", name.as_str(), pols.short()));
            }
        }
    }
    verdict(
        8,
        cells == 30 && mismatches.is_empty(),
        &format!("{cells} cells, mismatches [{}]", mismatches.join(", ")),
    );
}

fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
    let mut x = seed;
    (0..n)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

#[test]
fn criterion_09_property_suite() {
    let _serial = serial();
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };

    let axis = |n: usize| (0..n).map(|k| 1.5 + 0.01 * k as f64).collect::<Vec<_>>();
    for (seed, rows, cols) in [(3u64, 6usize, 9usize), (11, 12, 7), (29, 16, 16)] {
        let v = pseudo_random(2 * rows * cols, seed);
        let m = DMatrix::from_fn(rows, cols, |r, c| {
            C64::new(v[2 * (r * cols + c)], v[2 * (r * cols + c) + 1])
        });
        let js = JointSpectrum::from_matrix(m, axis(rows), axis(cols)).unwrap();
        let d = schmidt_decompose(&js, SpectrumMode::Amplitude).unwrap();
        check((d.coefficients.iter().sum::<f64>() - 1.0).abs() < 1e-9, "normalization");
        check((d.purity() - 1.0 / d.schmidt_number()).abs() < 1e-9, "P = 1/K");
        let t = schmidt_decompose(&js.transposed(), SpectrumMode::Amplitude).unwrap();
        check(
            d.coefficients
                .iter()
                .zip(&t.coefficients)
                .all(|(a, b)| (a - b).abs() < 1e-12),
            "transpose",
        );
    }

    let (f, g) = (pseudo_random(10, 5), pseudo_random(14, 7));
    let m = DMatrix::from_fn(10, 14, |r, c| C64::new(f[r] + 1.0, 0.0) * C64::new(g[c], 0.3));
    let js = JointSpectrum::from_matrix(m, axis(10), axis(14)).unwrap();
    let k = schmidt_decompose(&js, SpectrumMode::Amplitude)
        .unwrap()
        .schmidt_number();
    check((k - 1.0).abs() < 1e-9, "rank-1");

    for name in CrystalName::ALL {
        let c = crystal(name);
        let t = c.reference_temperature_c;
        for (pump, signal) in [(0.7, 1.2), (0.8, 1.5), (0.9, 1.7)] {
            let Ok(grating) = first_order_grating(&c, TYPE_II, pump, signal, t) else {
                continue;
            };
            for s in solve_signal_wavelengths(&c, TYPE_II, pump, grating, t) {
                let p = SpdcProcess::new(c.clone(), TYPE_II, pump, s, t, grating, 10.0).unwrap();
                check(p.phase_mismatch().abs() < 1e-10, "QPM residual");
                check(
                    energy_residual(pump, s, idler_wavelength(pump, s)) < 1e-12,
                    "energy residual",
                );
            }
        }
    }

    let coarse = SchmidtReport::from_spectrum(&ktp_791_spectrum(512))
        .unwrap()
        .schmidt_number;
    let fine = SchmidtReport::from_spectrum(&ktp_791_spectrum(1024))
        .unwrap()
        .schmidt_number;
    check((coarse - fine).abs() < 1e-3, "grid convergence");

    let tmp = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| Command::new(BIN).current_dir(tmp.path()).args(args).output().unwrap();
    let args = [
        "--crystal",
        "KTP",
        "--temp",
        "50",
        "--grid",
        "256",
        "--out",
        "a",
        "jsa",
        "--pump",
        "0.791",
        "--L",
        "30",
        "--tau",
        "2.5",
        "--components",
    ];
    let first = run(&args);
    let again = run(&["rerun", "a/manifest.json", "--out", "b"]);
    let identical = first.status.success()
        && again.status.success()
        && std::fs::read_dir(tmp.path().join("a")).unwrap().all(|e| {
            let path = e.unwrap().path();
            std::fs::read(&path).ok() == std::fs::read(tmp.path().join("b").join(path.file_name().unwrap())).ok()
        });
    check(identical, "byte-identical rerun");

    let details = format!(
        "K 512^2 {coarse:.6}, 1024^2 {fine:.6}; failures [{}]",
        failures.join(", ")
    );
    verdict(9, failures.is_empty(), &details);
}

#[test]
fn criterion_10_atlases() {
    let _serial = serial();
    let settings = AtlasSettings::default();
    let pumps = pump_grid(0.4, 1.6, 0.005);
    let mut pass = true;
    let mut details = Vec::new();
    for name in CrystalName::ALL {
        let c = crystal(name);
        let t = if name == CrystalName::Ktp {
            KTP_T
        } else {
            c.reference_temperature_c
        };
        for pols in ["e:oo", "o:ee"] {
            let start = Instant::now();
            let points = purity_atlas(&c, pols.parse().unwrap(), &pumps, t, &settings).unwrap();
            let elapsed = start.elapsed().as_secs_f64();
            pass &= points.is_empty();
            details.push(format!("{} {pols} {} ({elapsed:.0} s)", name.as_str(), points.len()));
        }
    }

    let ktp = crystal(CrystalName::Ktp);
    let start = Instant::now();
    let atlas = purity_atlas(&ktp, TYPE_II, &pumps, KTP_T, &settings).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let tail: Vec<_> = atlas.iter().filter(|p| p.pump_um >= 0.66 - 1e-9).collect();
    let one_per_pump = tail.windows(2).all(|w| w[1].pump_um > w[0].pump_um);
    let lower_rises = tail.windows(2).all(|w| w[1].signal_lo_um > w[0].signal_lo_um);
    let upper_falls = tail.windows(2).all(|w| w[1].signal_hi_um <= w[0].signal_hi_um + 1e-12);
    let shape = !tail.is_empty() && one_per_pump && lower_rises && upper_falls;
    pass &= shape && elapsed < 600.0;
    details.push(format!(
        "KTP o:oe {} intervals over {} pumps in {elapsed:.0} s, single branch with monotone edges above 660 nm: {shape}",
        atlas.len(),
        pumps.len()
    ));
    verdict(10, pass, &format!("pure type-I intervals: {}", details.join(", ")));
}
