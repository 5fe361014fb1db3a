//! Built-in demonstration systems, each with an observation trace.

use thiserror::Error;

use crate::config::{parse_system, parse_trace, ConfigError, SystemConfig};
use crate::engine::Observation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}` (known: {known})", known = NAMES.join(", "))]
    Unknown(String),
    #[error("scenario `{name}`: {source}")]
    Invalid { name: String, source: ConfigError },
}

macro_rules! scenario {
    ($name:literal) => {
        (
            $name,
            include_str!(concat!("../scenarios/", $name, ".rmcs")),
            include_str!(concat!("../scenarios/", $name, ".trace")),
        )
    };
}

const SOURCES: &[(&str, &str, &str)] = &[
    scenario!("clock"),
    scenario!("broken-clock"),
    scenario!("guess"),
    scenario!("assisted-living"),
    scenario!("sensor-merge"),
    scenario!("frame"),
    scenario!("windows"),
    scenario!("focus"),
    scenario!("idle"),
];

pub const NAMES: &[&str] = &[
    "clock",
    "broken-clock",
    "guess",
    "assisted-living",
    "sensor-merge",
    "frame",
    "windows",
    "focus",
    "idle",
];

/// System and trace text of a scenario.
pub fn scenario_source(name: &str) -> Option<(&'static str, &'static str)> {
    SOURCES.iter().find(|(n, _, _)| *n == name).map(|&(_, s, t)| (s, t))
}

pub fn build_scenario(name: &str) -> Result<(SystemConfig, Vec<Observation>), ScenarioError> {
    let (system, trace) = scenario_source(name).ok_or_else(|| ScenarioError::Unknown(name.to_string()))?;
    let invalid = |source| ScenarioError::Invalid {
        name: name.to_string(),
        source,
    };
    let cfg = parse_system(system).map_err(invalid)?;
    let trace = parse_trace(trace, &cfg.sensors).map_err(invalid)?;
    Ok((cfg, trace))
}
