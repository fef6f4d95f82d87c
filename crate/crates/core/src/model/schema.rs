use std::fmt;
use std::sync::Arc;

use serde_json::Value;

use super::entity::{is_bookkeeping_key, EXTRACTORS_KEY, UUIDS_KEY};
use crate::error::{Error, Result};

/// A compiled draft 2020-12 JSON Schema describing an entity shape.
///
/// The source document is kept alongside the compiled validator so the
/// schema can be serialized back into models (link targets) and configs.
#[derive(Clone)]
pub struct EntitySchema {
    document: Value,
    validator: Arc<jsonschema::Validator>,
    hide_bookkeeping: bool,
}

impl EntitySchema {
    pub fn new(document: Value) -> Result<Self> {
        if let Err(e) = jsonschema::draft202012::meta::validate(&document) {
            return Err(Error::Schema(format!("not a valid JSON Schema document: {e}")));
        }
        let validator = jsonschema::draft202012::new(&document)
            .map_err(|e| Error::Schema(format!("failed to compile schema: {e}")))?;
        let hide_bookkeeping = !mentions_any(&document, &[UUIDS_KEY, EXTRACTORS_KEY])
            && mentions_any(&document, KEY_SET_KEYWORDS);
        Ok(Self {
            document,
            validator: Arc::new(validator),
            hide_bookkeeping,
        })
    }

    /// The schema that accepts every value.
    pub fn any() -> Self {
        Self::new(Value::Object(Default::default())).expect("empty schema is valid")
    }

    pub fn document(&self) -> &Value {
        &self.document
    }

    /// `$uuids` and `$extractors` are invisible to schemas that do not name
    /// them, so keywords such as `additionalProperties: false` ignore them.
    pub fn is_valid(&self, instance: &Value) -> bool {
        if self.hide_bookkeeping {
            self.validator.is_valid(&without_bookkeeping(instance))
        } else {
            self.validator.is_valid(instance)
        }
    }

    /// Human-readable reasons `instance` fails, each prefixed with the
    /// instance location.
    pub fn errors(&self, instance: &Value) -> Vec<String> {
        let stripped;
        let instance = if self.hide_bookkeeping {
            stripped = without_bookkeeping(instance);
            &stripped
        } else {
            instance
        };
        self.validator
            .iter_errors(instance)
            .map(|e| {
                let at = e.instance_path().to_string();
                let at = if at.is_empty() { "(root)".to_string() } else { at };
                format!("{at}: {e}")
            })
            .collect()
    }
}

// Keywords whose outcome depends on which keys an object has.
const KEY_SET_KEYWORDS: &[&str] = &[
    "additionalProperties",
    "unevaluatedProperties",
    "propertyNames",
    "maxProperties",
    "minProperties",
    "patternProperties",
];

fn mentions_any(document: &Value, needles: &[&str]) -> bool {
    match document {
        Value::Object(map) => map
            .iter()
            .any(|(k, v)| needles.contains(&k.as_str()) || mentions_any(v, needles)),
        Value::Array(items) => items.iter().any(|v| mentions_any(v, needles)),
        Value::String(s) => needles.contains(&s.as_str()),
        _ => false,
    }
}

fn without_bookkeeping(value: &Value) -> Value {
    match value {
        Value::Object(map) => Value::Object(
            map.iter()
                .filter(|(k, _)| !is_bookkeeping_key(k))
                .map(|(k, v)| (k.clone(), without_bookkeeping(v)))
                .collect(),
        ),
        Value::Array(items) => Value::Array(items.iter().map(without_bookkeeping).collect()),
        other => other.clone(),
    }
}

impl fmt::Debug for EntitySchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("EntitySchema").field(&self.document).finish()
    }
}

impl PartialEq for EntitySchema {
    fn eq(&self, other: &Self) -> bool {
        self.document == other.document
    }
}
