//! Discovers services declared in a Docker Compose file.

use std::path::{Component, Path};

use serde_json::{json, Map, Value};
use serde_yaml::Value as Yaml;

use crate::error::{Error, Result};
use crate::extractor::{ExtractorSpec, RunContext};
use crate::model::{EntitySchema, ModelEntity, PATH_KEY};

pub const ID: &str = "compose-services";

const COMPOSE_FILES: &[&str] = &["docker-compose.yml", "docker-compose.yaml", "compose.yml", "compose.yaml"];

/// Service-level extension listing the HTTP paths a service serves.
pub const ENDPOINTS_EXTENSION: &str = "x-endpoints";

pub fn spec() -> ExtractorSpec {
    let schema = EntitySchema::new(json!({
        "type": "object",
        "properties": {
            "$TYPE": {"const": "architecture"},
            "$path": {"type": "string"}
        },
        "required": ["$TYPE", "$path"]
    }))
    .expect("static schema");
    ExtractorSpec::in_process(ID, schema, run)
}

fn run(mut entity: ModelEntity, ctx: &RunContext<'_>) -> Result<ModelEntity> {
    let Some(base) = ctx.entity_path(&entity).map(str::to_owned) else {
        return Ok(entity);
    };
    let dir = ctx.resolve(&base);
    let Some(file) = COMPOSE_FILES.iter().map(|f| dir.join(f)).find(|p| p.is_file()) else {
        log::debug!("no compose file under {}", dir.display());
        return Ok(entity);
    };
    let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
    let doc: Yaml = serde_yaml::from_str(&text).map_err(|e| Error::Parse {
        origin: file.display().to_string(),
        message: e.to_string(),
    })?;
    let services = match doc.get("services") {
        None | Some(Yaml::Null) => return Ok(entity),
        Some(Yaml::Mapping(m)) => m,
        Some(_) => {
            return Err(Error::Parse {
                origin: file.display().to_string(),
                message: "`services` must be a mapping".into(),
            })
        }
    };
    for (key, service) in services {
        let Some(name) = key.as_str() else {
            return Err(Error::Parse {
                origin: file.display().to_string(),
                message: format!("service key {key:?} is not a string"),
            });
        };
        let fields = service_fields(name, service, &base);
        let created = ctx.create_model_entity("microservice", fields)?;
        entity.push_to("microservices", created.into_value())?;
    }
    Ok(entity)
}

fn service_fields(name: &str, service: &Yaml, base: &str) -> Map<String, Value> {
    let mut fields = Map::new();
    fields.insert("name".into(), json!(name));
    fields.insert("domain".into(), json!(name));

    let ports = service
        .get("ports")
        .and_then(Yaml::as_sequence)
        .map(|entries| {
            let mut out: Vec<u16> = Vec::new();
            for p in entries.iter().flat_map(container_ports) {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
            out
        })
        .unwrap_or_default();
    if !ports.is_empty() {
        fields.insert("ports".into(), json!(ports));
    }

    if let Some(context) = build_context(service) {
        if let Some(path) = join_relative(base, context) {
            fields.insert(PATH_KEY.into(), json!(path));
        }
    }

    if let Some(endpoints) = service.get(ENDPOINTS_EXTENSION).and_then(Yaml::as_sequence) {
        let endpoints: Vec<&str> = endpoints.iter().filter_map(Yaml::as_str).collect();
        if !endpoints.is_empty() {
            fields.insert("endpoints".into(), json!(endpoints));
        }
    }
    fields
}

fn build_context(service: &Yaml) -> Option<&str> {
    match service.get("build")? {
        Yaml::String(s) => Some(s),
        build @ Yaml::Mapping(_) => Some(build.get("context").and_then(Yaml::as_str).unwrap_or(".")),
        _ => None,
    }
}

/// Container-side ports of one `ports` entry. Published ranges expand when
/// they span at most 100 ports.
pub(crate) fn container_ports(entry: &Yaml) -> Vec<u16> {
    match entry {
        Yaml::Number(n) => n.as_u64().and_then(|n| u16::try_from(n).ok()).into_iter().collect(),
        Yaml::String(s) => {
            let spec = s.split('/').next().unwrap_or_default();
            let container = spec.rsplit(':').next().unwrap_or_default();
            match container.split_once('-') {
                Some((lo, hi)) => match (lo.parse::<u16>(), hi.parse::<u16>()) {
                    (Ok(lo), Ok(hi)) if lo <= hi && hi - lo <= 100 => (lo..=hi).collect(),
                    _ => Vec::new(),
                },
                None => container.parse().ok().into_iter().collect(),
            }
        }
        Yaml::Mapping(_) => entry
            .get("target")
            .map(container_ports)
            .unwrap_or_default(),
        _ => Vec::new(),
    }
}

/// Joins a compose build context onto the repository-relative directory of
/// the compose file. Remote contexts (URLs) and contexts escaping the
/// repository yield `None`.
pub(crate) fn join_relative(base: &str, context: &str) -> Option<String> {
    if context.contains("://") || context.starts_with("git@") || Path::new(context).is_absolute() {
        return None;
    }
    let mut parts: Vec<String> = Vec::new();
    for comp in Path::new(base).join(context).components() {
        match comp {
            Component::Normal(p) => parts.push(p.to_string_lossy().into_owned()),
            Component::ParentDir => {
                parts.pop()?;
            }
            Component::CurDir => {}
            Component::RootDir | Component::Prefix(_) => return None,
        }
    }
    Some(if parts.is_empty() { ".".into() } else { parts.join("/") })
}
