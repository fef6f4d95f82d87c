use serde_json::{json, Value};

use crate::error::Result;
use crate::extractor::{ExtractorSpec, RunContext};
use crate::model::{EntitySchema, ModelEntity};

pub const ID: &str = "java-detector";

/// Accepts microservices that know where their source lives.
pub fn microservice_with_path() -> EntitySchema {
    EntitySchema::new(json!({
        "type": "object",
        "properties": {
            "$TYPE": {"const": "microservice"},
            "$path": {"type": "string"}
        },
        "required": ["$TYPE", "$path"]
    }))
    .expect("static schema")
}

/// Sets `java: true` when the service tree holds any `.java` file. The
/// field is left absent otherwise.
pub fn spec() -> ExtractorSpec {
    ExtractorSpec::in_process(ID, microservice_with_path(), run)
}

fn run(mut entity: ModelEntity, ctx: &RunContext<'_>) -> Result<ModelEntity> {
    let Some(path) = ctx.entity_path(&entity) else {
        return Ok(entity);
    };
    if !ctx.resolve(path).is_dir() {
        log::warn!("{ID}: {path} is not a directory");
        return Ok(entity);
    }
    if !ctx.scan_at(path).get_paths("**/*.java")?.is_empty() {
        entity.insert("java", Value::Bool(true));
    }
    Ok(entity)
}
