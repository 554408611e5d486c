//! Experiment configuration files (JSON, schema `cohatlas-config/1`).
//!
//! Paths inside a config are resolved relative to the config file.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const CONFIG_SCHEMA: &str = "cohatlas-config/1";
pub const DIM_CAP_ENV: &str = "COHATLAS_DIM_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ClassifyMap,
    VacuumTest,
    CoherenceTest,
    ResolveUnity,
    AtlasCheck,
    DualityFilter,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::ClassifyMap => "classify-map",
            Kind::VacuumTest => "vacuum-test",
            Kind::CoherenceTest => "coherence-test",
            Kind::ResolveUnity => "resolve-unity",
            Kind::AtlasCheck => "atlas-check",
            Kind::DualityFilter => "duality-filter",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub n_modes: usize,
    pub cutoff: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub radial_order: usize,
    pub angular_count: usize,
    pub radius_cut: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { radial_order: 64, angular_count: 128, radius_cut: 6.0 }
    }
}

/// A named input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedPath {
    pub name: String,
    pub path: String,
}

/// A state family for `resolve-unity`; without a map it is the coherent family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Required max-norm of `S − 1` for the coherent family.
    pub unity: f64,
    pub canonicity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { unity: 1e-8, canonicity: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<ModeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<NamedPath>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atlases: Vec<NamedPath>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<FamilyConfig>,
    /// Coherent labels, one `[re, im]` pair per mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composition_depth: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != CONFIG_SCHEMA {
            return Err(invalid(format!("schema must be `{CONFIG_SCHEMA}`, found `{}`", self.schema)));
        }
        let t = self.tolerances;
        if !(t.unity.is_finite() && t.unity > 0.0 && t.canonicity.is_finite() && t.canonicity > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if let Some(m) = self.modes {
            if m.n_modes == 0 || m.cutoff == 0 {
                return Err(invalid("modes.n_modes and modes.cutoff must be positive"));
            }
        }
        for probe in &self.probes {
            if probe.iter().flatten().any(|x| !x.is_finite()) {
                return Err(invalid("probe components must be finite"));
            }
        }
        let needs_modes = !matches!(self.kind, Kind::ClassifyMap | Kind::DualityFilter);
        if needs_modes && self.modes.is_none() {
            return Err(invalid(format!("kind {} requires `modes`", self.kind)));
        }
        match self.kind {
            Kind::ClassifyMap | Kind::VacuumTest | Kind::DualityFilter if self.maps.is_empty() => {
                return Err(invalid(format!("kind {} requires `maps`", self.kind)));
            }
            Kind::CoherenceTest if self.maps.is_empty() || self.probes.is_empty() => {
                return Err(invalid("kind coherence-test requires `maps` and `probes`"));
            }
            Kind::ResolveUnity if self.families.is_empty() => {
                return Err(invalid("kind resolve-unity requires `families`"));
            }
            Kind::AtlasCheck if self.atlases.is_empty() => {
                return Err(invalid("kind atlas-check requires `atlases`"));
            }
            Kind::DualityFilter if self.composition_depth.unwrap_or(0) == 0 => {
                return Err(invalid("kind duality-filter requires a positive `composition_depth`"));
            }
            _ => {}
        }
        let mut names: Vec<&str> = self
            .maps
            .iter()
            .map(|m| m.name.as_str())
            .chain(self.atlases.iter().map(|a| a.name.as_str()))
            .chain(self.families.iter().map(|f| f.name.as_str()))
            .collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate item name `{}`", w[0])));
        }
        Ok(())
    }
}

/// Dimension cap from the environment, or the library default.
pub fn dim_cap() -> Result<usize, ConfigError> {
    match std::env::var(DIM_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| invalid(format!("{DIM_CAP_ENV} must be a positive integer, found `{v}`"))),
        Err(std::env::VarError::NotPresent) => Ok(cohatlas_core::fock::ModeSpec::DEFAULT_DIM_CAP),
        Err(e) => Err(invalid(format!("{DIM_CAP_ENV}: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentConfig {
        serde_json::from_str(
            r#"{"schema": "cohatlas-config/1", "kind": "coherence-test",
                "modes": {"n_modes": 1, "cutoff": 48},
                "maps": [{"name": "sum", "path": "maps/sum.poly"}],
                "probes": [[[0.8, 0.0]], [[0.1, -0.30000000000000004]]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_a_fixed_point() {
        let cfg = sample();
        cfg.validate().unwrap();
        let text = cfg.to_json();
        let again: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_json(), text);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = sample();
        cfg.schema = "other/1".into();
        assert!(cfg.validate().is_err());
        let mut cfg = sample();
        cfg.probes.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = sample();
        cfg.tolerances.unity = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = sample();
        cfg.modes = None;
        assert!(cfg.validate().is_err());
        let unknown = r#"{"schema": "cohatlas-config/1", "kind": "classify-map", "bogus": 1}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(unknown).is_err());
    }
}
