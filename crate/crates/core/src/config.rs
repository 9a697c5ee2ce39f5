//! Scenario configuration.
//!
//! A config file is a flat list of `key = value` lines (TOML syntax, no
//! tables). Every key can also be set from the command line; flags are
//! applied after the file, so they win. Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::{Result, SimError};
use crate::swipt::TransceiverKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Fig2,
    Fig3,
    Fig5,
    Field,
    Custom,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig5 => "fig5",
            Scenario::Field => "field",
            Scenario::Custom => "custom",
        }
    }

    fn default_baselines(&self) -> Vec<TransceiverKind> {
        use TransceiverKind::*;
        match self {
            Scenario::Fig2 | Scenario::Fig3 => vec![Oam, MimoZf, Siso],
            Scenario::Fig5 => vec![Oam, Siso],
            Scenario::Field | Scenario::Custom => vec![Oam, MimoSvd, MimoZf, Siso],
        }
    }
}

impl FromStr for Scenario {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Scenario::Fig2),
            "fig3" => Ok(Scenario::Fig3),
            "fig5" => Ok(Scenario::Fig5),
            "field" => Ok(Scenario::Field),
            "custom" => Ok(Scenario::Custom),
            other => Err(SimError::Config {
                key: "scenario".into(),
                message: format!("unknown scenario `{other}` (expected fig2, fig3, fig5, field or custom)"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, json or svg)")),
        }
    }
}

/// Receive-array misalignment: lateral offset (m) and tilt (degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Misalignment {
    pub lateral_offset_m: f64,
    pub tilt_deg: f64,
}

impl Misalignment {
    pub const fn new(lateral_offset_m: f64, tilt_deg: f64) -> Self {
        Self { lateral_offset_m, tilt_deg }
    }
}

/// Fully resolved run configuration. Defaults reproduce the reference setup:
/// 8-element UCAs of radius 0.1 m, 5 m apart, 28 GHz, 40 dBm/Hz transmit
/// power, −20 dBm/Hz channel noise, unit conversion efficiency, 1 Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub elements: usize,
    pub radius_m: f64,
    pub distance_m: f64,
    pub frequency_hz: f64,
    pub tx_power_dbm_per_hz: f64,
    pub noise_dbm_per_hz: f64,
    /// σ_cov² as a multiple of σ².
    pub conversion_noise_ratio: f64,
    pub conversion_efficiency: f64,
    pub bandwidth_hz: f64,
    pub lateral_offset_m: f64,
    pub tilt_deg: f64,
    pub samples: usize,
    pub seed: u64,
    pub grid_size: usize,
    pub baselines: Vec<TransceiverKind>,
    /// Also emit the Lagrangian upper bound for separable OAM links.
    pub lagrangian: bool,
    pub conversion_noise_ratios: Vec<f64>,
    pub distances_m: Vec<f64>,
    pub misalignments: Vec<Misalignment>,
    pub field_z_m: f64,
    pub field_extent_m: f64,
    pub field_resolution: usize,
    pub field_modes: Vec<usize>,
    pub aperture_radius_m: f64,
    pub out_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    /// Evaluate Monte Carlo chunks on the thread pool; output is identical either way.
    pub parallel: bool,
}

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "scenario",
    "elements",
    "radius_m",
    "distance_m",
    "frequency_hz",
    "tx_power_dbm_per_hz",
    "noise_dbm_per_hz",
    "conversion_noise_ratio",
    "conversion_efficiency",
    "bandwidth_hz",
    "lateral_offset_m",
    "tilt_deg",
    "samples",
    "seed",
    "grid_size",
    "baselines",
    "lagrangian",
    "conversion_noise_ratios",
    "distances_m",
    "misalignments",
    "field_z_m",
    "field_extent_m",
    "field_resolution",
    "field_modes",
    "aperture_radius_m",
    "out_dir",
    "formats",
    "parallel",
];

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            elements: 8,
            radius_m: 0.1,
            distance_m: 5.0,
            frequency_hz: 28e9,
            tx_power_dbm_per_hz: 40.0,
            noise_dbm_per_hz: -20.0,
            conversion_noise_ratio: 0.05,
            conversion_efficiency: 1.0,
            bandwidth_hz: 1.0,
            lateral_offset_m: 0.0,
            tilt_deg: 0.0,
            samples: crate::region::DEFAULT_SAMPLES,
            seed: 0,
            grid_size: crate::region::DEFAULT_GRID_SIZE,
            baselines: scenario.default_baselines(),
            lagrangian: true,
            conversion_noise_ratios: vec![0.05, 0.5, 5.0],
            distances_m: vec![5.0, 10.0, 15.0],
            misalignments: vec![
                Misalignment::new(0.0, 0.0),
                Misalignment::new(0.5, 5.0),
                Misalignment::new(1.0, 10.0),
                Misalignment::new(0.5, 0.0),
                Misalignment::new(1.0, 0.0),
                Misalignment::new(0.0, 5.0),
                Misalignment::new(0.0, 10.0),
            ],
            field_z_m: crate::field::DEFAULT_PLANE_DISTANCE,
            field_extent_m: crate::field::DEFAULT_EXTENT,
            field_resolution: crate::field::DEFAULT_RESOLUTION,
            field_modes: vec![0, 1, 2, 3, 4],
            aperture_radius_m: 0.2,
            out_dir: PathBuf::from("results"),
            formats: vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg],
            parallel: true,
        }
    }

    /// Parses a config file body onto the defaults for `scenario`.
    pub fn from_str_for(scenario: Scenario, text: &str) -> Result<Self> {
        let mut cfg = Self::new(scenario);
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| SimError::Config {
            key: "<file>".into(),
            message: e.message().to_string(),
        })?;
        // `scenario` first so later keys see scenario-specific defaults
        if let Some(v) = table.get("scenario") {
            self.apply_value("scenario", v)?;
        }
        for (key, value) in &table {
            if key != "scenario" {
                self.apply_value(key, value)?;
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        self.apply_text(&text)
    }

    /// Applies a command-line override. `raw` is parsed as a TOML value when
    /// possible; list keys also accept comma-separated items.
    pub fn apply_override(&mut self, key: &str, raw: &str) -> Result<()> {
        let value = parse_cli_value(raw);
        let value = match value {
            Value::Array(_) => value,
            _ if LIST_KEYS.contains(&key) => {
                Value::Array(split_list(raw).into_iter().map(|s| parse_cli_value(&s)).collect())
            }
            v => v,
        };
        self.apply_value(key, &value)
    }

    pub fn apply_value(&mut self, key: &str, value: &Value) -> Result<()> {
        let err = |message: String| SimError::Config { key: key.to_string(), message };
        match key {
            "scenario" => {
                let scenario: Scenario = as_str(value).map_err(err)?.parse()?;
                if scenario != self.scenario {
                    let baselines_default = self.baselines == self.scenario.default_baselines();
                    self.scenario = scenario;
                    if baselines_default {
                        self.baselines = scenario.default_baselines();
                    }
                }
            }
            "elements" => self.elements = as_usize(value).map_err(err)?,
            "radius_m" => self.radius_m = as_f64(value).map_err(err)?,
            "distance_m" => self.distance_m = as_f64(value).map_err(err)?,
            "frequency_hz" => self.frequency_hz = as_f64(value).map_err(err)?,
            "tx_power_dbm_per_hz" => self.tx_power_dbm_per_hz = as_f64(value).map_err(err)?,
            "noise_dbm_per_hz" => self.noise_dbm_per_hz = as_f64(value).map_err(err)?,
            "conversion_noise_ratio" => self.conversion_noise_ratio = as_f64(value).map_err(err)?,
            "conversion_efficiency" => self.conversion_efficiency = as_f64(value).map_err(err)?,
            "bandwidth_hz" => self.bandwidth_hz = as_f64(value).map_err(err)?,
            "lateral_offset_m" => self.lateral_offset_m = as_f64(value).map_err(err)?,
            "tilt_deg" => self.tilt_deg = as_f64(value).map_err(err)?,
            "samples" => self.samples = as_usize(value).map_err(err)?,
            "seed" => {
                self.seed = match value {
                    Value::Integer(i) if *i >= 0 => *i as u64,
                    // seeds above i64::MAX arrive as strings
                    Value::String(s) => s.parse().map_err(|_| err(format!("`{s}` is not a u64")))?,
                    other => return Err(err(format!("expected a non-negative integer, got {other}"))),
                }
            }
            "grid_size" => self.grid_size = as_usize(value).map_err(err)?,
            "baselines" => {
                self.baselines = as_list(value, |v| {
                    let s = as_str(v)?;
                    TransceiverKind::parse(s)
                        .ok_or_else(|| format!("unknown baseline `{s}` (expected oam, mimo-svd, mimo-zf or siso)"))
                })
                .map_err(err)?
            }
            "lagrangian" => self.lagrangian = as_bool(value).map_err(err)?,
            "conversion_noise_ratios" => self.conversion_noise_ratios = as_list(value, as_f64).map_err(err)?,
            "distances_m" => self.distances_m = as_list(value, as_f64).map_err(err)?,
            "misalignments" => self.misalignments = as_list(value, as_misalignment).map_err(err)?,
            "field_z_m" => self.field_z_m = as_f64(value).map_err(err)?,
            "field_extent_m" => self.field_extent_m = as_f64(value).map_err(err)?,
            "field_resolution" => self.field_resolution = as_usize(value).map_err(err)?,
            "field_modes" => self.field_modes = as_list(value, as_usize).map_err(err)?,
            "aperture_radius_m" => self.aperture_radius_m = as_f64(value).map_err(err)?,
            "out_dir" => self.out_dir = PathBuf::from(as_str(value).map_err(err)?),
            "formats" => {
                self.formats = as_list(value, |v| as_str(v)?.parse::<OutputFormat>()).map_err(err)?
            }
            "parallel" => self.parallel = as_bool(value).map_err(err)?,
            _ => return Err(err(format!("unknown key (accepted keys: {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Range checks that need no model construction. Model constructors
    /// repeat the physical checks.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| {
            Err(SimError::Config { key: key.to_string(), message: message.to_string() })
        };
        let positive = [
            ("radius_m", self.radius_m),
            ("distance_m", self.distance_m),
            ("frequency_hz", self.frequency_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("field_z_m", self.field_z_m),
            ("field_extent_m", self.field_extent_m),
            ("aperture_radius_m", self.aperture_radius_m),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(key, "must be positive and finite");
            }
        }
        for (key, v) in [("tx_power_dbm_per_hz", self.tx_power_dbm_per_hz), ("noise_dbm_per_hz", self.noise_dbm_per_hz)] {
            if !v.is_finite() {
                return bad(key, "must be finite");
            }
        }
        if self.elements == 0 {
            return bad("elements", "must be at least 1");
        }
        if !(self.conversion_noise_ratio.is_finite() && self.conversion_noise_ratio >= 0.0) {
            return bad("conversion_noise_ratio", "must be non-negative");
        }
        if !(self.conversion_efficiency > 0.0 && self.conversion_efficiency <= 1.0) {
            return bad("conversion_efficiency", "must lie in (0, 1]");
        }
        if !(self.lateral_offset_m.is_finite() && self.lateral_offset_m >= 0.0) {
            return bad("lateral_offset_m", "must be non-negative");
        }
        if !(0.0..90.0).contains(&self.tilt_deg) {
            return bad("tilt_deg", "must lie in [0, 90)");
        }
        if self.samples == 0 {
            return bad("samples", "must be at least 1");
        }
        if self.grid_size < 2 {
            return bad("grid_size", "must be at least 2");
        }
        if self.baselines.is_empty() && self.scenario != Scenario::Field {
            return bad("baselines", "at least one baseline is required");
        }
        if self.conversion_noise_ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("conversion_noise_ratios", "entries must be non-negative");
        }
        if self.distances_m.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return bad("distances_m", "entries must be positive");
        }
        for m in &self.misalignments {
            if !(m.lateral_offset_m.is_finite() && m.lateral_offset_m >= 0.0 && (0.0..90.0).contains(&m.tilt_deg)) {
                return bad("misalignments", "offsets must be non-negative and tilts in [0, 90)");
            }
        }
        if self.field_resolution < 2 {
            return bad("field_resolution", "must be at least 2");
        }
        if let Some(m) = self.field_modes.iter().find(|&&m| m >= self.elements) {
            return bad("field_modes", &format!("mode {m} out of range for {} elements", self.elements));
        }
        if self.formats.is_empty() {
            return bad("formats", "at least one output format is required");
        }
        Ok(())
    }

    /// Renders the config in the file format accepted by [`Self::apply_text`].
    pub fn to_config_text(&self) -> String {
        // TOML integers are i64; the seed is written as a string when it overflows
        let value = toml::Value::try_from(Self { seed: 0, ..self.clone() }).expect("config is always representable");
        let table = value.as_table().expect("config serializes to a table");
        let mut out = String::new();
        for key in KEYS {
            if *key == "seed" {
                match i64::try_from(self.seed) {
                    Ok(s) => out.push_str(&format!("seed = {s}\n")),
                    Err(_) => out.push_str(&format!("seed = \"{}\"\n", self.seed)),
                }
            } else if let Some(v) = table.get(*key) {
                out.push_str(&format!("{key} = {v}\n"));
            }
        }
        out
    }
}

const LIST_KEYS: &[&str] =
    &["baselines", "conversion_noise_ratios", "distances_m", "misalignments", "field_modes", "formats"];

fn parse_cli_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn split_list(raw: &str) -> Vec<String> {
    raw.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn as_f64(v: &Value) -> std::result::Result<f64, String> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(format!("expected a number, got {other}")),
    }
}

fn as_usize(v: &Value) -> std::result::Result<usize, String> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(format!("expected a non-negative integer, got {other}")),
    }
}

fn as_bool(v: &Value) -> std::result::Result<bool, String> {
    v.as_bool().ok_or_else(|| format!("expected true or false, got {v}"))
}

fn as_str(v: &Value) -> std::result::Result<&str, String> {
    v.as_str().ok_or_else(|| format!("expected a string, got {v}"))
}

fn as_list<T>(
    v: &Value,
    item: impl Fn(&Value) -> std::result::Result<T, String>,
) -> std::result::Result<Vec<T>, String> {
    match v {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, x)| item(x).map_err(|e| format!("item {i}: {e}")))
            .collect(),
        other => Err(format!("expected a list, got {other}")),
    }
}

/// `"dx:tilt"` string or a `[dx, tilt]` pair.
fn as_misalignment(v: &Value) -> std::result::Result<Misalignment, String> {
    match v {
        Value::String(s) => {
            let (dx, tilt) = s.split_once(':').ok_or_else(|| format!("expected `offset_m:tilt_deg`, got `{s}`"))?;
            let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
            Ok(Misalignment::new(num(dx)?, num(tilt)?))
        }
        Value::Array(pair) if pair.len() == 2 => Ok(Misalignment::new(as_f64(&pair[0])?, as_f64(&pair[1])?)),
        Value::Table(t) => {
            let get = |k: &str| t.get(k).ok_or_else(|| format!("missing `{k}`")).and_then(as_f64);
            Ok(Misalignment::new(get("lateral_offset_m")?, get("tilt_deg")?))
        }
        other => Err(format!("expected `offset_m:tilt_deg` or [offset_m, tilt_deg], got {other}")),
    }
}
