//! The JSON experiment configuration: schema, loading with field-path
//! errors, env-seed override, and the resolved-config sidecar every run
//! stamps next to its outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sbc_core::bounds::TailQuery;
use sbc_core::{InfluenceSpec, NoiseSpec, PairingPolicy};

use crate::Failure;

/// Top-level experiment document. Unknown keys are rejected everywhere:
/// a misspelled parameter silently defaulting would poison reproducibility.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<TailQuery>,
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub influence: InfluenceSpec,
    pub noise: NoiseSpec,
    /// Initial difference for two-agent simulation (tail estimation
    /// requires 0, the default).
    #[serde(default)]
    pub y0: f64,
    /// Steps to simulate; required by `simulate`, ignored by bound-only use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    /// Present: `simulate` runs the multi-agent dynamics on this graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub n_agents: usize,
    pub edges: Vec<(u32, u32)>,
    pub initial_opinions: Vec<f64>,
    #[serde(default = "default_pairing")]
    pub pairing: PairingPolicy,
}

fn default_pairing() -> PairingPolicy {
    PairingPolicy::SingleRandomEdge
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub n_replicates: u64,
    #[serde(default = "default_worker_count")]
    pub worker_count: usize,
    pub master_seed: u64,
}

fn default_worker_count() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Accepted formats: "csv", "json".
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_formats() -> Vec<String> {
    vec!["csv".into()]
}

/// Parse the `SBC_SEED` override, if set. It beats any master_seed in a
/// config or preset, so a whole workflow can be re-seeded from the shell.
pub fn env_seed_override() -> Result<Option<u64>, Failure> {
    match std::env::var("SBC_SEED") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| Failure::Schema(format!("SBC_SEED must be an unsigned 64-bit integer, got '{s}'"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::Schema(format!("SBC_SEED: {e}"))),
    }
}

/// Load, schema-validate, and semantically validate a config file, applying
/// the `SBC_SEED` override. Schema errors carry the JSON field path.
pub fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let mut config: ExperimentConfig = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| Failure::Schema(format!("{}: at {}: {}", path.display(), e.path(), e.inner())))?;
    if let Some(seed) = env_seed_override()? {
        config.run.master_seed = seed;
    }
    validate(&config)?;
    Ok(config)
}

fn validate(config: &ExperimentConfig) -> Result<(), Failure> {
    config.model.influence.validate()?;
    config.model.noise.validate()?;
    if !config.model.y0.is_finite() {
        return Err(Failure::Schema("model.y0 must be finite".into()));
    }
    if config.run.n_replicates == 0 {
        return Err(Failure::Schema("run.n_replicates must be >= 1".into()));
    }
    if config.run.worker_count == 0 {
        return Err(Failure::Schema("run.worker_count must be >= 1".into()));
    }
    if let Some(q) = &config.query {
        q.validate()?;
    }
    if let Some(out) = &config.output {
        for f in &out.formats {
            if f != "csv" && f != "json" {
                return Err(Failure::Schema(format!(
                    "output.formats: unknown format '{f}' (known: csv, json)"
                )));
            }
        }
    }
    Ok(())
}

/// Write the fully resolved config next to a run's outputs. Re-feeding this
/// file to the CLI reproduces the run bit for bit (absent a new SBC_SEED).
pub fn write_sidecar(dir: &Path, config: &ExperimentConfig) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(config)
        .map_err(|e| Failure::Io(format!("serializing resolved config: {e}")))?;
    fs::write(dir.join("resolved_config.json"), text + "\n")?;
    Ok(())
}
