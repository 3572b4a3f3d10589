//! Shipped run configurations.

use crate::io::{parse_config_str, ConfigError, RunConfig};

pub const TWO_DOMAIN: &str = include_str!("../presets/two-domain.cfg");
pub const THREE_DOMAIN: &str = include_str!("../presets/three-domain.cfg");
pub const BURGERS_1D: &str = include_str!("../presets/burgers-1d.cfg");

pub const NAMES: [&str; 3] = ["two-domain", "three-domain", "burgers-1d"];

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PresetError {
    #[error("unknown preset `{0}` (expected two-domain, three-domain or burgers-1d)")]
    Unknown(String),
    #[error("preset `{name}` is invalid: {source}")]
    Invalid { name: String, source: ConfigError },
}

pub fn preset_text(name: &str) -> Result<&'static str, PresetError> {
    match name {
        "two-domain" => Ok(TWO_DOMAIN),
        "three-domain" => Ok(THREE_DOMAIN),
        "burgers-1d" => Ok(BURGERS_1D),
        other => Err(PresetError::Unknown(other.to_string())),
    }
}

pub fn preset(name: &str) -> Result<RunConfig, PresetError> {
    parse_config_str(preset_text(name)?).map_err(|source| PresetError::Invalid {
        name: name.to_string(),
        source,
    })
}
