//! File formats: matrix text, spectrum metadata, reports, CSV tables and
//! run manifests. Every writer is deterministic for identical inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qpm::Grating;
use crate::spectrum::{JointSpectrum, PumpPulse, SchmidtReport, SpectrumMode, C64};

/// Renders the spectrum with one line per signal sample. Amplitude mode
/// writes `re,im` tokens, intensity mode writes |A|².
pub fn matrix_to_string(js: &JointSpectrum, mode: SpectrumMode) -> String {
    let a = js.amplitudes();
    let mut out = String::new();
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            if c > 0 {
                out.push(' ');
            }
            let z = a[(r, c)];
            match mode {
                SpectrumMode::Amplitude => write!(out, "{:e},{:e}", z.re, z.im),
                SpectrumMode::Intensity => write!(out, "{:e}", z.norm_sqr()),
            }
            .expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

/// Parses text written by [`matrix_to_string`]. Tokens without a comma are
/// read as real values.
pub fn matrix_from_str(text: &str) -> Result<DMatrix<C64>> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: bad number {s:?}: {e}", line_no + 1)))
        };
        let row = line
            .split_whitespace()
            .map(|tok| match tok.split_once(',') {
                Some((re, im)) => Ok(C64::new(parse(re)?, parse(im)?)),
                None => Ok(C64::new(parse(tok)?, 0.0)),
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, found {}",
                    line_no + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

/// Description of the process that produced a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessMetadata {
    pub crystal: String,
    pub pols: String,
    pub pump_um: f64,
    pub signal_um: f64,
    pub idler_um: f64,
    pub temperature_c: f64,
    pub grating: Grating,
    pub length_mm: f64,
}

/// Sidecar document accompanying a matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMetadata {
    pub mode: SpectrumMode,
    pub rows: usize,
    pub columns: usize,
    pub signal_um: Vec<f64>,
    pub idler_um: Vec<f64>,
    pub normalization: String,
    pub process: Option<ProcessMetadata>,
    pub pump: Option<PumpPulse>,
    pub flags: Vec<String>,
}

impl SpectrumMetadata {
    pub fn new(js: &JointSpectrum, mode: SpectrumMode) -> Self {
        let normalization = match mode {
            SpectrumMode::Amplitude => "sum |A|^2 = 1",
            SpectrumMode::Intensity => "sum I = 1",
        };
        SpectrumMetadata {
            mode,
            rows: js.signal_axis().len(),
            columns: js.idler_axis().len(),
            signal_um: js.signal_axis().to_vec(),
            idler_um: js.idler_axis().to_vec(),
            normalization: normalization.into(),
            process: js.process().map(|p| ProcessMetadata {
                crystal: p.crystal.name.as_str().into(),
                pols: p.pols.short(),
                pump_um: p.pump_um,
                signal_um: p.signal_um,
                idler_um: p.idler_um,
                temperature_c: p.temperature_c,
                grating: p.grating,
                length_mm: p.length_mm,
            }),
            pump: js.pump().copied(),
            flags: js.flags().describe().into_iter().map(String::from).collect(),
        }
    }
}

/// Reads a matrix file and its sidecar back into a spectrum. Intensity
/// files come back as real non-negative amplitudes √I.
pub fn read_spectrum(matrix: &Path, sidecar: &Path) -> Result<JointSpectrum> {
    let meta: SpectrumMetadata =
        serde_json::from_str(&read_text(sidecar)?).map_err(|e| Error::Parse(format!("{}: {e}", sidecar.display())))?;
    let mut a = matrix_from_str(&read_text(matrix)?)?;
    if a.nrows() != meta.rows || a.ncols() != meta.columns {
        return Err(Error::Validation(format!(
            "matrix is {}x{} but sidecar declares {}x{}",
            a.nrows(),
            a.ncols(),
            meta.rows,
            meta.columns
        )));
    }
    if meta.mode == SpectrumMode::Intensity {
        a.apply(|z| *z = C64::new(z.re.max(0.0).sqrt(), 0.0));
    }
    JointSpectrum::from_matrix(a, meta.signal_um, meta.idler_um)
}

/// Writes `<stem>.txt` and `<stem>.json` into `dir`, returning both paths.
pub fn write_spectrum(dir: &Path, stem: &str, js: &JointSpectrum, mode: SpectrumMode) -> Result<[String; 2]> {
    let matrix = format!("{stem}.txt");
    let sidecar = format!("{stem}.json");
    write_text(&dir.join(&matrix), &matrix_to_string(js, mode))?;
    write_text(&dir.join(&sidecar), &to_json(&SpectrumMetadata::new(js, mode))?)?;
    Ok([matrix, sidecar])
}

pub fn report_to_json(report: &SchmidtReport) -> Result<String> {
    to_json(report)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// CSV with a header taken from the row type's field names.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

/// Record of a run: the resolved configuration, the crystal data it read
/// and digests of everything it wrote. Contains no timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub crystal_data: String,
    pub crystal_data_sha256: String,
    pub outputs: Vec<OutputDigest>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl Manifest {
    /// Digests each listed output file under `dir`.
    pub fn digest_outputs(&mut self, dir: &Path, files: &[String]) -> Result<()> {
        self.outputs = files
            .iter()
            .map(|f| {
                let path = dir.join(f);
                let bytes = fs::read(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
                Ok(OutputDigest {
                    file: f.clone(),
                    sha256: sha256_hex(&bytes),
                })
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_text(&dir.join(MANIFEST_FILE), &to_json(self)?)
    }

    /// Files under `dir` whose current digest differs from the recorded one.
    pub fn mismatched_outputs(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|o| {
                fs::read(dir.join(&o.file))
                    .map(|b| sha256_hex(&b) != o.sha256)
                    .unwrap_or(true)
            })
            .map(|o| o.file.clone())
            .collect()
    }
}
