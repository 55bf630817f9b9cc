//! Text, JSON and CSV file formats.

mod circuit;
mod counts;
mod device;
mod noise;
mod trace;

pub use circuit::{parse_circuit, read_circuit, write_circuit};
pub use counts::{counts_from_json, counts_to_json};
pub use device::{layout_from_json, layout_to_json, parse_edge_list, read_edge_list, write_edge_list};
pub use noise::{noise_from_toml, noise_preset, preset_names, NoiseParams, PRESETS_TOML};
pub use trace::{trace_to_csv, write_trace};

use std::path::Path;

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_text(path, &s)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}
