//! Crystal material database.
//!
//! A [`CrystalSet`] is read from a TOML document (grammar in `data/FORMAT.md`)
//! and is immutable after loading. The default set ships inside the crate.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sellmeier::{SellmeierSet, ThermoOptic};

/// The shipped crystal data file.
pub const DEFAULT_DATA: &str = include_str!("../data/crystals.toml");

/// Principal polarization axis for propagation along x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// Ordinary, along y.
    #[serde(rename = "o")]
    O,
    /// Extraordinary, along z.
    #[serde(rename = "e")]
    E,
}

impl Axis {
    pub fn as_char(self) -> char {
        match self {
            Axis::O => 'o',
            Axis::E => 'e',
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::O => Axis::E,
            Axis::E => Axis::O,
        }
    }

    fn from_char(c: char) -> Option<Axis> {
        match c {
            'o' | 'O' | 'y' => Some(Axis::O),
            'e' | 'E' | 'z' => Some(Axis::E),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CrystalName {
    Ktp,
    Cta,
    Kta,
    Rta,
    Rtp,
}

impl CrystalName {
    pub const ALL: [CrystalName; 5] = [
        CrystalName::Ktp,
        CrystalName::Cta,
        CrystalName::Kta,
        CrystalName::Rta,
        CrystalName::Rtp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CrystalName::Ktp => "KTP",
            CrystalName::Cta => "CTA",
            CrystalName::Kta => "KTA",
            CrystalName::Rta => "RTA",
            CrystalName::Rtp => "RTP",
        }
    }
}

impl fmt::Display for CrystalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CrystalName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let upper = trimmed.strip_prefix("pp").unwrap_or(trimmed).to_ascii_uppercase();
        CrystalName::ALL
            .into_iter()
            .find(|n| n.as_str() == upper)
            .ok_or_else(|| Error::Validation(format!("unknown crystal name {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpdcType {
    #[serde(rename = "0")]
    Type0,
    #[serde(rename = "I")]
    TypeI,
    #[serde(rename = "II")]
    TypeII,
}

impl fmt::Display for SpdcType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpdcType::Type0 => "0",
            SpdcType::TypeI => "I",
            SpdcType::TypeII => "II",
        })
    }
}

/// Polarizations of pump, signal and idler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PolarizationConfig {
    pub pump: Axis,
    pub signal: Axis,
    pub idler: Axis,
}

impl PolarizationConfig {
    pub const fn new(pump: Axis, signal: Axis, idler: Axis) -> Self {
        PolarizationConfig { pump, signal, idler }
    }

    /// The six rows of the d_eff table, in table order.
    pub const TABLE_ROWS: [PolarizationConfig; 6] = [
        PolarizationConfig::new(Axis::O, Axis::O, Axis::O),
        PolarizationConfig::new(Axis::E, Axis::E, Axis::E),
        PolarizationConfig::new(Axis::O, Axis::E, Axis::E),
        PolarizationConfig::new(Axis::E, Axis::O, Axis::O),
        PolarizationConfig::new(Axis::O, Axis::O, Axis::E),
        PolarizationConfig::new(Axis::E, Axis::O, Axis::E),
    ];

    /// Type-II o → o + e, the configuration used for CDDC and the
    /// degenerate scans.
    pub const TYPE_II: PolarizationConfig = PolarizationConfig::new(Axis::O, Axis::O, Axis::E);

    /// Signal and idler swapped.
    pub fn swapped(self) -> Self {
        PolarizationConfig::new(self.pump, self.idler, self.signal)
    }

    /// Representative with signal/idler ordered o before e.
    pub fn canonical(self) -> Self {
        if self.signal > self.idler {
            self.swapped()
        } else {
            self
        }
    }

    pub fn spdc_type(self) -> SpdcType {
        if self.signal != self.idler {
            SpdcType::TypeII
        } else if self.signal == self.pump {
            SpdcType::Type0
        } else {
            SpdcType::TypeI
        }
    }

    /// `"o->o+e"` form used as the d_eff key.
    pub fn key(self) -> String {
        format!(
            "{}->{}+{}",
            self.pump.as_char(),
            self.signal.as_char(),
            self.idler.as_char()
        )
    }

    /// `"o:oe"` form used on the command line.
    pub fn short(self) -> String {
        format!(
            "{}:{}{}",
            self.pump.as_char(),
            self.signal.as_char(),
            self.idler.as_char()
        )
    }
}

impl fmt::Display for PolarizationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromStr for PolarizationConfig {
    type Err = Error;

    /// Accepts `o:oe`, `o->o+e` and `o→o+e`.
    fn from_str(s: &str) -> Result<Self> {
        let axes: Vec<Axis> = s
            .chars()
            .filter(|c| c.is_alphabetic())
            .map(|c| Axis::from_char(c).ok_or(c))
            .collect::<std::result::Result<_, char>>()
            .map_err(|c| Error::Validation(format!("bad axis {c:?} in polarization {s:?}")))?;
        let well_formed = s.contains(':') || s.contains("->") || s.contains('→');
        if axes.len() != 3 || !well_formed {
            return Err(Error::Validation(format!(
                "polarization {s:?} must look like \"o:oe\" or \"o->o+e\""
            )));
        }
        Ok(PolarizationConfig::new(axes[0], axes[1], axes[2]))
    }
}

/// A crystal and its material data.
#[derive(Debug, Clone, PartialEq)]
pub struct Crystal {
    pub name: CrystalName,
    pub reference_temperature_c: f64,
    /// Transparency window (lower, upper) in µm.
    pub transparency: (f64, f64),
    pub sellmeier_o: SellmeierSet,
    pub sellmeier_e: SellmeierSet,
    pub thermo_o: Option<ThermoOptic>,
    pub thermo_e: Option<ThermoOptic>,
    /// Keyed by canonical configuration; always holds all six rows.
    pub deff: BTreeMap<PolarizationConfig, f64>,
    pub citations: Vec<String>,
}

impl Crystal {
    /// Dispersion-free test medium with the given indices on both axes.
    pub fn synthetic(name: CrystalName, n_o: f64, n_e: f64) -> Crystal {
        Crystal {
            name,
            reference_temperature_c: 20.0,
            transparency: (0.2, 10.0),
            sellmeier_o: SellmeierSet::constant(n_o),
            sellmeier_e: SellmeierSet::constant(n_e),
            thermo_o: None,
            thermo_e: None,
            deff: PolarizationConfig::TABLE_ROWS.iter().map(|p| (*p, 0.0)).collect(),
            citations: vec!["synthetic".into()],
        }
    }

    pub fn sellmeier(&self, axis: Axis) -> &SellmeierSet {
        match axis {
            Axis::O => &self.sellmeier_o,
            Axis::E => &self.sellmeier_e,
        }
    }

    pub fn thermo_optic(&self, axis: Axis) -> Option<&ThermoOptic> {
        match axis {
            Axis::O => self.thermo_o.as_ref(),
            Axis::E => self.thermo_e.as_ref(),
        }
    }

    /// Tabulated |d_eff| in pm/V.
    pub fn effective_nonlinearity(&self, pols: PolarizationConfig) -> f64 {
        self.deff.get(&pols.canonical()).copied().unwrap_or(0.0)
    }

    /// Whether `wavelength_um` lies inside the transparency window.
    pub fn in_transparency(&self, wavelength_um: f64) -> Result<bool> {
        if !(wavelength_um > 0.0) || !wavelength_um.is_finite() {
            return Err(Error::Precondition(format!(
                "wavelength must be positive, got {wavelength_um}"
            )));
        }
        let (lo, hi) = self.transparency;
        Ok(wavelength_um >= lo && wavelength_um <= hi)
    }

    fn validate(&self) -> Result<()> {
        let name = self.name;
        let (lo, hi) = self.transparency;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Validation(format!(
                "{name}.transparency_um: need 0 < lower < upper, got [{lo}, {hi}]"
            )));
        }
        if !self.reference_temperature_c.is_finite() {
            return Err(Error::Validation(format!("{name}.reference_temperature_c: not finite")));
        }
        for (axis, set) in [("o", &self.sellmeier_o), ("e", &self.sellmeier_e)] {
            set.validate()
                .map_err(|e| Error::Validation(format!("{name}.sellmeier.{axis}: {e}")))?;
        }
        for (axis, t) in [("o", &self.thermo_o), ("e", &self.thermo_e)] {
            if let Some(t) = t {
                t.validate()
                    .map_err(|e| Error::Validation(format!("{name}.thermo_optic.{axis}: {e}")))?;
            }
        }
        for row in PolarizationConfig::TABLE_ROWS {
            match self.deff.get(&row) {
                Some(v) if v.is_finite() && *v >= 0.0 => {}
                Some(v) => {
                    return Err(Error::Validation(format!(
                        "{name}.deff: row {row} has invalid value {v}"
                    )))
                }
                None => return Err(Error::Validation(format!("{name}.deff: missing row {row}"))),
            }
        }
        if self.citations.is_empty() {
            return Err(Error::Validation(format!("{name}.citations: empty")));
        }
        Ok(())
    }
}

// On-disk representation.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataFile {
    crystal: Vec<RawCrystal>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCrystal {
    name: String,
    reference_temperature_c: f64,
    transparency_um: [f64; 2],
    citations: Vec<String>,
    sellmeier: RawAxes<SellmeierSet>,
    #[serde(default, skip_serializing_if = "RawThermo::is_empty")]
    thermo_optic: RawThermo,
    deff: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxes<T> {
    o: T,
    e: T,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    o: Option<ThermoOptic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    e: Option<ThermoOptic>,
}

impl RawThermo {
    fn is_empty(&self) -> bool {
        self.o.is_none() && self.e.is_none()
    }
}

impl RawCrystal {
    fn into_crystal(self) -> Result<Crystal> {
        let name: CrystalName = self.name.parse()?;
        let mut deff = BTreeMap::new();
        for (key, value) in self.deff {
            let pols: PolarizationConfig = key
                .parse()
                .map_err(|_| Error::Validation(format!("{name}.deff: bad configuration key {key:?}")))?;
            if deff.insert(pols.canonical(), value).is_some() {
                return Err(Error::Validation(format!(
                    "{name}.deff: configuration {} listed more than once",
                    pols.canonical()
                )));
            }
        }
        let crystal = Crystal {
            name,
            reference_temperature_c: self.reference_temperature_c,
            transparency: (self.transparency_um[0], self.transparency_um[1]),
            sellmeier_o: self.sellmeier.o,
            sellmeier_e: self.sellmeier.e,
            thermo_o: self.thermo_optic.o,
            thermo_e: self.thermo_optic.e,
            deff,
            citations: self.citations,
        };
        crystal.validate()?;
        Ok(crystal)
    }

    fn from_crystal(c: &Crystal) -> RawCrystal {
        RawCrystal {
            name: c.name.as_str().to_string(),
            reference_temperature_c: c.reference_temperature_c,
            transparency_um: [c.transparency.0, c.transparency.1],
            citations: c.citations.clone(),
            sellmeier: RawAxes {
                o: c.sellmeier_o.clone(),
                e: c.sellmeier_e.clone(),
            },
            thermo_optic: RawThermo {
                o: c.thermo_o.clone(),
                e: c.thermo_e.clone(),
            },
            deff: c.deff.iter().map(|(k, v)| (k.key(), *v)).collect(),
        }
    }
}

/// An immutable collection of crystals with unique names.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSet {
    crystals: Vec<Arc<Crystal>>,
    digest: String,
}

impl CrystalSet {
    /// The crystal data shipped with the crate.
    pub fn default_set() -> CrystalSet {
        CrystalSet::from_toml_str(DEFAULT_DATA).expect("shipped crystal data is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CrystalSet> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        CrystalSet::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<CrystalSet> {
        let file: DataFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut crystals: Vec<Arc<Crystal>> = Vec::with_capacity(file.crystal.len());
        for raw in file.crystal {
            let crystal = raw.into_crystal()?;
            if crystals.iter().any(|c| c.name == crystal.name) {
                return Err(Error::Validation(format!("duplicate crystal {}", crystal.name)));
            }
            crystals.push(Arc::new(crystal));
        }
        Ok(CrystalSet {
            crystals,
            digest: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let file = DataFile {
            crystal: self.crystals.iter().map(|c| RawCrystal::from_crystal(c)).collect(),
        };
        toml::to_string(&file).map_err(|e| Error::Parse(e.to_string()))
    }

    /// SHA-256 of the source text, hex encoded.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn len(&self) -> usize {
        self.crystals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crystals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Crystal>> {
        self.crystals.iter()
    }

    pub fn get(&self, name: CrystalName) -> Option<Arc<Crystal>> {
        self.crystals.iter().find(|c| c.name == name).cloned()
    }

    /// Looks a crystal up by name, failing with a validation error.
    pub fn require(&self, name: CrystalName) -> Result<Arc<Crystal>> {
        self.get(name)
            .ok_or_else(|| Error::Validation(format!("crystal {name} not in data set")))
    }

    /// d_eff table as CSV: `crystal,config,type,deff_pm_per_v`.
    pub fn deff_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["crystal", "config", "type", "deff_pm_per_v"])
            .map_err(|e| Error::Parse(e.to_string()))?;
        for c in &self.crystals {
            for row in PolarizationConfig::TABLE_ROWS {
                w.write_record([
                    c.name.as_str().to_string(),
                    row.key(),
                    row.spdc_type().to_string(),
                    c.effective_nonlinearity(row).to_string(),
                ])
                .map_err(|e| Error::Parse(e.to_string()))?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}
