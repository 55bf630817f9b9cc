use std::collections::BTreeMap;

use qmlids_core::sim::{Confusion, NoiseModel};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bundled synthetic presets.
pub const PRESETS_TOML: &str = include_str!("../../presets/noise.toml");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    pub p1: f64,
    pub p2: f64,
    pub readout_p10: f64,
    pub readout_p01: f64,
    #[serde(default)]
    pub p_idle: f64,
}

impl NoiseParams {
    pub fn to_model(self) -> Result<NoiseModel> {
        let m = NoiseModel::depolarizing(self.p1, self.p2)
            .with_readout(Confusion { p10: self.readout_p10, p01: self.readout_p01 })
            .with_idle(self.p_idle);
        m.validate()?;
        Ok(m)
    }
}

/// Parses a table of named presets.
pub fn noise_from_toml(text: &str) -> Result<BTreeMap<String, NoiseParams>> {
    toml::from_str(text).map_err(|e| Error::Config(format!("noise presets: {e}")))
}

pub fn preset_names() -> Vec<String> {
    let table = noise_from_toml(PRESETS_TOML).expect("bundled presets parse");
    let mut names: Vec<(f64, String)> = table.into_iter().map(|(k, v)| (v.p1, k)).collect();
    names.sort_by(|a, b| a.0.total_cmp(&b.0));
    names.into_iter().map(|(_, k)| k).collect()
}

/// A bundled preset; `ideal` and `none` give the noiseless model.
pub fn noise_preset(name: &str) -> Result<NoiseModel> {
    if matches!(name, "ideal" | "none") {
        return Ok(NoiseModel::ideal());
    }
    let table = noise_from_toml(PRESETS_TOML)?;
    table
        .get(name)
        .ok_or_else(|| Error::Usage(format!("unknown noise preset `{name}` (known: {})", preset_names().join(", "))))?
        .to_model()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_increase_in_severity() {
        let names = preset_names();
        assert_eq!(names, ["cairo", "kyoto", "brisbane", "osaka", "sherbrooke"]);
        let models: Vec<NoiseModel> = names.iter().map(|n| noise_preset(n).unwrap()).collect();
        for w in models.windows(2) {
            assert!(w[0].p1 < w[1].p1 && w[0].p2 < w[1].p2 && w[0].readout.p10 < w[1].readout.p10);
        }
        assert_eq!(noise_preset("brisbane").unwrap().p1, 0.01);
        assert_eq!(noise_preset("sherbrooke").unwrap().p1, 0.05);
        assert!(noise_preset("nairobi").is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(noise_from_toml("[x]\np1 = 0.1\np2 = 0.1\nreadout_p10 = 0\nreadout_p01 = 0\np3 = 1\n").is_err());
    }
}
