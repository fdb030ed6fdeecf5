//! Flat key-value config files for the simulator: one `key = value` pair
//! per line, `#` comments. Command-line flags override file values.

use std::collections::BTreeMap;
use std::path::Path;

use qkdsec::bb84sim::{EveStrategy, ProtocolConfig};

pub fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "config line {} is not `key = value`: {raw}",
                lineno + 1
            ));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Apply config-file entries onto a base protocol config. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
pub fn apply(base: &mut ProtocolConfig, map: &BTreeMap<String, String>) -> Result<(), String> {
    for (key, value) in map {
        let parse_f64 =
            || -> Result<f64, String> { value.parse().map_err(|e| format!("{key}: {e}")) };
        match key.as_str() {
            "m" | "m_qubits" => {
                base.m_qubits = value.parse().map_err(|e| format!("{key}: {e}"))?;
            }
            "q" | "intercept_fraction" => base.intercept_fraction = parse_f64()?,
            "strategy" | "eve_strategy" => {
                base.eve_strategy = value.parse::<EveStrategy>().map_err(|e| e.to_string())?;
            }
            "sample_fraction" | "qber_sample_fraction" => {
                base.qber_sample_fraction = parse_f64()?;
            }
            "threshold" | "qber_abort_threshold" => base.qber_abort_threshold = parse_f64()?,
            "ec_efficiency" => base.ec_efficiency = parse_f64()?,
            "l" | "final_key_bits" => {
                base.final_key_bits = value.parse().map_err(|e| format!("{key}: {e}"))?;
            }
            "seed" | "rng_seed" => {
                base.rng_seed = value.parse().map_err(|e| format!("{key}: {e}"))?;
            }
            other => return Err(format!("unknown config key '{other}'")),
        }
    }
    Ok(())
}
