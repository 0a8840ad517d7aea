//! Binary PGM rendering of a joint intensity, signal along x and idler
//! increasing upward.

use std::path::Path;

use pairsource::{Error, JointSpectrum, Result};

pub fn pgm_bytes(js: &JointSpectrum) -> Vec<u8> {
    let intensity = js.intensity();
    let (rows, cols) = intensity.shape();
    let peak = intensity.max();
    let mut out = format!("P5\n{rows} {cols}\n255\n").into_bytes();
    for c in (0..cols).rev() {
        for r in 0..rows {
            let v = if peak > 0.0 { intensity[(r, c)] / peak } else { 0.0 };
            out.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn write_pgm(path: &Path, js: &JointSpectrum) -> Result<()> {
    std::fs::write(path, pgm_bytes(js)).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
