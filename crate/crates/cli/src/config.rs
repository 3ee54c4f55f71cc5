//! JSON run configurations. Every file carries a top-level `schema` field.

use std::path::Path;

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use purcellkit::dynamics::HistogramSimulation;
use purcellkit::fit::{DetuningFitConfig, LifetimeModel};
use purcellkit::model::{CavityMode, EmitterTransition, Polarization, RingGeometry};
use purcellkit::spectra::SpectrumConfig;

pub const SCHEMA: &str = "purcellkit/1";

/// Parses `text`, checks the schema tag and deserializes the rest.
pub fn parse<C: DeserializeOwned>(text: &str) -> anyhow::Result<C> {
    let mut value: serde_json::Value = serde_json::from_str(text).context("malformed JSON")?;
    let obj = value
        .as_object_mut()
        .context("configuration must be a JSON object")?;
    match obj.remove("schema") {
        Some(serde_json::Value::String(s)) if s == SCHEMA => {}
        Some(other) => bail!("unsupported schema {other}, expected {SCHEMA:?}"),
        None => bail!("missing \"schema\" field, expected {SCHEMA:?}"),
    }
    serde_json::from_value(value).context("invalid configuration")
}

pub fn load<C: DeserializeOwned>(path: &Path) -> anyhow::Result<C> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}

fn default_band() -> (f64, f64) {
    (620.0, 660.0)
}

fn default_polarizations() -> Vec<Polarization> {
    vec![Polarization::TE, Polarization::TM]
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModesConfig {
    #[serde(default = "RingGeometry::diamond_microring")]
    pub geometry: RingGeometry<f64>,
    #[serde(default = "default_band")]
    pub band_nm: (f64, f64),
    #[serde(default = "default_polarizations")]
    pub polarizations: Vec<Polarization>,
    /// Q attached to every resonance (the solver does not compute losses).
    #[serde(default)]
    pub quality_factor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PurcellConfig {
    pub emitter: EmitterTransition<f64>,
    pub modes: Vec<CavityMode<f64>>,
    /// Per-mode η; defaults to the emitter's overlap for every mode.
    #[serde(default)]
    pub overlaps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSimulation {
    pub emitter: EmitterTransition<f64>,
    pub modes: Vec<CavityMode<f64>>,
    pub peak_f: Vec<f64>,
    pub detunings_nm: Vec<f64>,
    #[serde(default)]
    pub relative_noise: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimulateConfig {
    Histogram(HistogramSimulation<f64>),
    DetuningScan(ScanSimulation),
}

fn default_skip() -> f64 {
    3.0
}

fn default_model() -> LifetimeModel {
    LifetimeModel::SingleExp
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FitLifetimeConfig {
    pub repetition_rate_mhz: f64,
    #[serde(default = "default_skip")]
    pub skip_ns: f64,
    #[serde(default = "default_model")]
    pub model: LifetimeModel,
}

pub type FitDetuningConfig = DetuningFitConfig<f64>;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TuningMapConfig {
    pub spectrum: SpectrumConfig<f64>,
    pub shifts_nm: Vec<f64>,
}
