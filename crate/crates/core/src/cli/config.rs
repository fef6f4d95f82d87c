//! Reconstruction configuration, read from JSON.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::extractor::{ExternalCommand, ExtractorSpec, Registry, DEFAULT_EXTERNAL_TIMEOUT};
use crate::model::EntitySchema;
use crate::std_extractors::{self, BUILTIN_IDS};

pub const DEFAULT_TYPE: &str = "architecture";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialEntity {
    #[serde(default = "default_type")]
    pub type_tag: String,
    #[serde(default)]
    pub fields: Map<String, Value>,
}

fn default_type() -> String {
    DEFAULT_TYPE.into()
}

impl Default for InitialEntity {
    fn default() -> Self {
        Self {
            type_tag: default_type(),
            fields: Map::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    pub id: String,
    pub input_schema: Value,
    pub argv: Vec<String>,
    /// Seconds.
    #[serde(default)]
    pub timeout: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionConfig {
    #[serde(default)]
    pub initial_entity: InitialEntity,
    /// Registration order is execution order. Defaults to every built-in.
    #[serde(default = "default_enabled")]
    pub enabled_extractors: Vec<String>,
    #[serde(default)]
    pub external_extractors: Vec<ExternalConfig>,
    #[serde(default)]
    pub deterministic_ids: bool,
    /// Directory relative `argv[0]` values are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_enabled() -> Vec<String> {
    BUILTIN_IDS.iter().map(|s| s.to_string()).collect()
}

impl FromStr for ReconstructionConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

impl ReconstructionConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = text.parse::<Self>().map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    /// Builds the registry; every enabled id must name a built-in or a
    /// configured external extractor.
    pub fn registry(&self) -> Result<Registry> {
        let mut registry = Registry::new();
        for id in &self.enabled_extractors {
            let external = self.external_extractors.iter().find(|e| &e.id == id);
            let spec = match (external, std_extractors::builtin(id)) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config(format!("external extractor {id:?} shadows a built-in")))
                }
                (Some(ext), None) => self.external_spec(ext)?,
                (None, Some(spec)) => spec,
                (None, None) => return Err(Error::Config(format!("unknown extractor id {id:?}"))),
            };
            registry
                .register_extractor(spec)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        for ext in &self.external_extractors {
            if !self.enabled_extractors.contains(&ext.id) {
                log::warn!("external extractor {:?} is configured but not enabled", ext.id);
            }
        }
        Ok(registry)
    }

    fn external_spec(&self, ext: &ExternalConfig) -> Result<ExtractorSpec> {
        let schema = EntitySchema::new(ext.input_schema.clone())
            .map_err(|e| Error::Config(format!("extractor {:?}: {e}", ext.id)))?;
        let mut argv = ext.argv.clone();
        if let Some(program) = argv.first_mut() {
            if program.starts_with("./") || program.starts_with("../") {
                *program = self.base_dir.join(&*program).to_string_lossy().into_owned();
            }
        }
        let timeout = match ext.timeout {
            None => DEFAULT_EXTERNAL_TIMEOUT,
            Some(s) if s.is_finite() && s > 0.0 => Duration::from_secs_f64(s),
            Some(s) => return Err(Error::Config(format!("extractor {:?}: bad timeout {s}", ext.id))),
        };
        let command = ExternalCommand::new(argv)
            .map_err(|e| Error::Config(e.to_string()))?
            .with_timeout(timeout);
        Ok(ExtractorSpec::external(ext.id.clone(), schema, command))
    }
}
