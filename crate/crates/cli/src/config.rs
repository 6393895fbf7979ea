//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shockphase::coexistence::VolumeEntropySpec;
use shockphase::{EosSpec, Error, Result, ScalarFn, VdwParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Native units of the equation of state.
    Si,
    /// V, P and T divided by their critical values.
    Reduced,
}

/// Van der Waals constants for `eos = "vdw"`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VdwTable {
    pub a: f64,
    pub b: f64,
    pub n: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

/// Top-level keys of a config file. Command sections stay raw until the
/// flags of the running command are laid over them.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub eos: Option<String>,
    pub units: Option<Units>,
    pub out: Option<PathBuf>,
    pub vdw: Option<VdwTable>,
    /// Volume entropy `S0(V)`, needed for non-vdW surfaces.
    pub s0: Option<ScalarFn>,
    pub isotherm: Option<toml::Table>,
    pub critical_point: Option<toml::Table>,
    pub maxwell: Option<toml::Table>,
    pub coexistence: Option<toml::Table>,
    pub clapeyron: Option<toml::Table>,
    pub pearcey: Option<toml::Table>,
    pub universal: Option<toml::Table>,
    pub exponents: Option<toml::Table>,
    pub pde: Option<toml::Table>,
    pub shocks: Option<toml::Table>,
    pub fit: Option<toml::Table>,
    pub phase_diagram: Option<toml::Table>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
    }

    pub fn section(&self, name: &str) -> Option<&toml::Table> {
        match name {
            "isotherm" => self.isotherm.as_ref(),
            "critical_point" => self.critical_point.as_ref(),
            "maxwell" => self.maxwell.as_ref(),
            "coexistence" => self.coexistence.as_ref(),
            "clapeyron" => self.clapeyron.as_ref(),
            "pearcey" => self.pearcey.as_ref(),
            "universal" => self.universal.as_ref(),
            "exponents" => self.exponents.as_ref(),
            "pde" => self.pde.as_ref(),
            "shocks" => self.shocks.as_ref(),
            "fit" => self.fit.as_ref(),
            "phase_diagram" => self.phase_diagram.as_ref(),
            _ => None,
        }
    }
}

/// Lay the flags that were given over the file section and rebuild the
/// typed arguments; unknown keys in the section are rejected.
pub fn merge<T: Serialize + DeserializeOwned>(section: &str, file: Option<&toml::Table>, flags: &T) -> Result<T> {
    let mut merged = match file {
        Some(t) => serde_json::to_value(t)?,
        None => serde_json::Value::Object(Default::default()),
    };
    let given = serde_json::to_value(flags)?;
    if let (Some(m), Some(g)) = (merged.as_object_mut(), given.as_object()) {
        for (k, v) in g {
            if !v.is_null() {
                m.insert(k.clone(), v.clone());
            }
        }
    }
    serde_json::from_value(merged).map_err(|e| Error::Parse(format!("[{section}]: {e}")))
}

/// Check every section of the file against its argument type, so a typo
/// in an unused section still fails.
pub fn check_sections<F>(cfg: &FileConfig, check: F) -> Result<()>
where
    F: Fn(&str, &toml::Table) -> Result<()>,
{
    for name in crate::commands::SECTIONS {
        if let Some(t) = cfg.section(name) {
            check(name, t)?;
        }
    }
    Ok(())
}

/// Build the surface named by `name`: a built-in or a JSON file holding an
/// equation of state, bare, under an `eos` key, or as written by `fit`.
pub fn resolve_eos(name: &str, vdw: Option<VdwTable>) -> Result<EosSpec> {
    match name {
        "vdw-hydrogen" => Ok(EosSpec::Vdw(VdwParams::hydrogen())),
        "vdw-reduced" => Ok(EosSpec::Vdw(VdwParams::reduced())),
        "vdw" => {
            let p = vdw.ok_or_else(|| Error::invalid("vdw", "eos = \"vdw\" needs a [vdw] table with a, b, n, R"))?;
            EosSpec::vdw(VdwParams::new(p.a, p.b, p.n, p.r)?)
        }
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("eos `{path}` is neither a built-in nor a readable file: {e}")))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("eos file {path}: {e}")))?;
            let inner = match value.get("eos").or_else(|| value.get("fit").and_then(|f| f.get("eos"))) {
                Some(v) => v.clone(),
                None => value,
            };
            let eos: EosSpec =
                serde_json::from_value(inner).map_err(|e| Error::Parse(format!("eos file {path}: {e}")))?;
            eos.validate()?;
            Ok(eos)
        }
    }
}

/// `S0(V)` for the surface: closed form for vdW, otherwise the `s0` key,
/// checked against `alpha S0' = 1`.
pub fn resolve_entropy(eos: &EosSpec, s0: Option<&ScalarFn>) -> Result<VolumeEntropySpec> {
    if let Some(f) = s0 {
        let spec = VolumeEntropySpec { s0: f.clone() };
        let (lo, hi) = eos.search_range();
        let probes: Vec<f64> = (1..10).map(|k| lo + (hi - lo) * k as f64 / 10.0).collect();
        spec.check_consistency(eos, &probes, 1e-6)?;
        return Ok(spec);
    }
    match eos {
        EosSpec::Vdw(p) => Ok(VolumeEntropySpec::vdw(p)),
        _ => Err(Error::invalid(
            "s0",
            "a volume entropy is required for a non-vdW equation of state",
        )),
    }
}

/// Hex SHA-256 of the canonical JSON of `value`. Object keys are sorted,
/// so the digest depends only on the content.
pub fn digest(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("json values always serialize");
    hex::encode(Sha256::digest(&bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Args {
        a: Option<f64>,
        b: Option<Vec<f64>>,
    }

    #[test]
    fn flags_win_over_the_file() {
        let file: toml::Table = toml::from_str("a = 1.0\nb = [2.0]").unwrap();
        let m = merge("s", Some(&file), &Args { a: Some(5.0), b: None }).unwrap();
        assert_eq!(
            m,
            Args {
                a: Some(5.0),
                b: Some(vec![2.0])
            }
        );
    }

    #[test]
    fn unknown_section_keys_are_rejected() {
        let file: toml::Table = toml::from_str("c = 1.0").unwrap();
        let e = merge("s", Some(&file), &Args { a: None, b: None }).unwrap_err();
        assert!(e.to_string().contains("unknown field `c`"), "{e}");
    }

    #[test]
    fn unknown_top_level_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("eos = \"vdw-reduced\"\ncolour = 1").is_err());
        assert!(toml::from_str::<FileConfig>("[vdw]\na = 1\nb = 1\nn = 1\nR = 1\nc = 2").is_err());
    }

    #[test]
    fn digest_ignores_key_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"x": 1, "y": [1, 2]}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"y": [1, 2], "x": 1}"#).unwrap();
        assert_eq!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }
}
