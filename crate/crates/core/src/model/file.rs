use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use super::entity::ModelEntity;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: &str = "1";

/// A persisted model: `{"format_version": "1", "root": {...}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub format_version: String,
    pub root: ModelEntity,
}

impl ModelFile {
    pub fn new(root: ModelEntity) -> Self {
        Self {
            format_version: FORMAT_VERSION.to_string(),
            root,
        }
    }

    pub fn from_value(value: Value, origin: &str) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            origin: origin.to_string(),
            message,
        };
        let Value::Object(mut map) = value else {
            return Err(parse_err("model file must be a JSON object".into()));
        };
        let version = match map.get("format_version") {
            Some(Value::String(v)) => v.clone(),
            Some(other) => return Err(parse_err(format!("format_version must be a string, found {other}"))),
            None => return Err(parse_err("missing format_version".into())),
        };
        if version != FORMAT_VERSION {
            return Err(Error::Version {
                found: version,
                expected: FORMAT_VERSION.into(),
            });
        }
        let root = map
            .remove("root")
            .ok_or_else(|| parse_err("missing root".into()))?;
        let root = ModelEntity::try_from(root).map_err(|e| parse_err(format!("root: {e}")))?;
        Ok(Self {
            format_version: version,
            root,
        })
    }

    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("format_version".into(), Value::String(self.format_version.clone()));
        map.insert("root".into(), self.root.as_value().clone());
        Value::Object(map)
    }

    /// Canonical text: two-space indentation, insertion-ordered keys,
    /// trailing newline.
    pub fn to_canonical_string(&self) -> String {
        to_canonical_json(&self.to_value())
    }

    pub fn from_str(text: &str, origin: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        Self::from_value(value, origin)
    }
}

pub fn to_canonical_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}

pub fn read_model_file(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelFile::from_str(&text, &path.display().to_string())
}

pub fn write_model_file(model: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_canonical_string()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IdGenerator;
    use serde_json::json;

    fn sample() -> ModelFile {
        let ids = IdGenerator::sequential();
        let mut root = ModelEntity::new("architecture", Map::new(), &ids).unwrap();
        root.insert(
            "microservices",
            json!([{"$TYPE": "microservice", "$uuids": ["e-0002"], "$extractors": [], "name": "a"}]),
        );
        ModelFile::new(root)
    }

    #[test]
    fn write_then_read_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model.json");
        let m = sample();
        write_model_file(&m, &path).unwrap();
        assert_eq!(read_model_file(&path).unwrap(), m);
    }

    #[test]
    fn canonical_format_is_two_space_and_ordered() {
        let text = sample().to_canonical_string();
        assert!(text.starts_with("{\n  \"format_version\": \"1\",\n  \"root\": {\n    \"$TYPE\""));
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn garbage_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, "not json").unwrap();
        assert!(matches!(read_model_file(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let err = ModelFile::from_value(json!({"format_version": "99", "root": {}}), "x").unwrap_err();
        assert!(matches!(err, Error::Version { ref found, .. } if found == "99"));
    }

    #[test]
    fn root_must_be_object() {
        assert!(matches!(
            ModelFile::from_value(json!({"format_version": "1", "root": 3}), "x"),
            Err(Error::Parse { .. })
        ));
    }
}
