use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::ids::IdGenerator;
use super::pointer::JsonPointer;
use crate::error::{Error, Result};

pub const TYPE_KEY: &str = "$TYPE";
pub const UUIDS_KEY: &str = "$uuids";
pub const EXTRACTORS_KEY: &str = "$extractors";
pub const PATH_KEY: &str = "$path";
pub const LINK_TYPE: &str = "$LINK";

/// Any key beginning with `$` is internal. Uppercase ones (`$TYPE`, `$LINK`)
/// belong to the framework; lowercase ones carry extractor-to-extractor data.
pub fn is_internal_key(key: &str) -> bool {
    key.starts_with('$')
}

/// Keys extractors may use for their own data: `^\$[a-z0-9_]+$`.
pub fn is_extractor_data_key(key: &str) -> bool {
    key.strip_prefix('$').is_some_and(|rest| {
        !rest.is_empty()
            && rest
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
    })
}

pub fn is_bookkeeping_key(key: &str) -> bool {
    key == UUIDS_KEY || key == EXTRACTORS_KEY
}

/// True for objects carrying a string `$TYPE`.
pub fn is_entity(value: &Value) -> bool {
    value.get(TYPE_KEY).is_some_and(Value::is_string)
}

pub fn is_link(value: &Value) -> bool {
    value.get(TYPE_KEY).and_then(Value::as_str) == Some(LINK_TYPE)
}

/// A model entity: a JSON object with framework bookkeeping.
///
/// Stored as a `Value` that is always an object, so it can be handed to the
/// schema validator and aggregation without conversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "Value")]
pub struct ModelEntity(Value);

impl ModelEntity {
    /// Creates an entity with a fresh identity and an empty run record.
    pub fn new(type_tag: &str, fields: Map<String, Value>, ids: &IdGenerator) -> Result<Self> {
        for key in [UUIDS_KEY, EXTRACTORS_KEY] {
            if fields.contains_key(key) {
                return Err(Error::InvalidEntity(format!(
                    "initial fields may not set reserved key {key}"
                )));
            }
        }
        let mut map = Map::with_capacity(fields.len() + 3);
        map.insert(TYPE_KEY.into(), Value::String(type_tag.into()));
        map.insert(UUIDS_KEY.into(), Value::Array(vec![Value::String(ids.next_id())]));
        map.insert(EXTRACTORS_KEY.into(), Value::Array(Vec::new()));
        for (k, v) in fields {
            if k != TYPE_KEY {
                map.insert(k, v);
            }
        }
        Ok(Self(Value::Object(map)))
    }

    pub fn from_map(map: Map<String, Value>) -> Self {
        Self(Value::Object(map))
    }

    pub fn type_tag(&self) -> Option<&str> {
        self.0.get(TYPE_KEY).and_then(Value::as_str)
    }

    pub fn uuids(&self) -> Vec<&str> {
        string_array(self.0.get(UUIDS_KEY))
    }

    pub fn extractors_run(&self) -> Vec<&str> {
        string_array(self.0.get(EXTRACTORS_KEY))
    }

    pub fn has_run(&self, extractor_id: &str) -> bool {
        self.extractors_run().contains(&extractor_id)
    }

    pub fn record_extractor(&mut self, extractor_id: &str) {
        if self.has_run(extractor_id) {
            return;
        }
        let slot = self
            .fields_mut()
            .entry(EXTRACTORS_KEY)
            .or_insert_with(|| Value::Array(Vec::new()));
        if let Value::Array(items) = slot {
            items.push(Value::String(extractor_id.into()));
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn insert(&mut self, key: impl Into<String>, value: Value) -> Option<Value> {
        self.fields_mut().insert(key.into(), value)
    }

    pub fn fields(&self) -> &Map<String, Value> {
        self.0.as_object().expect("entity is an object")
    }

    pub fn fields_mut(&mut self) -> &mut Map<String, Value> {
        self.0.as_object_mut().expect("entity is an object")
    }

    pub fn user_fields(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.fields().iter().filter(|(k, _)| !is_internal_key(k))
    }

    pub fn internal_fields(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.fields().iter().filter(|(k, _)| is_internal_key(k))
    }

    /// Appends `item` to the array stored under `key`, creating it if needed.
    pub fn push_to(&mut self, key: &str, item: Value) -> Result<()> {
        match self.fields_mut().entry(key).or_insert_with(|| Value::Array(Vec::new())) {
            Value::Array(items) => {
                items.push(item);
                Ok(())
            }
            _ => Err(Error::InvalidEntity(format!("field {key} is not an array"))),
        }
    }

    pub fn as_value(&self) -> &Value {
        &self.0
    }

    pub fn into_value(self) -> Value {
        self.0
    }
}

impl TryFrom<Value> for ModelEntity {
    type Error = Error;

    fn try_from(value: Value) -> Result<Self> {
        match value {
            Value::Object(_) => Ok(Self(value)),
            other => Err(Error::InvalidEntity(format!(
                "expected a JSON object, found {}",
                kind(&other)
            ))),
        }
    }
}

impl From<ModelEntity> for Value {
    fn from(e: ModelEntity) -> Self {
        e.0
    }
}

pub(crate) fn kind(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn string_array(value: Option<&Value>) -> Vec<&str> {
    value
        .and_then(Value::as_array)
        .map(|items| items.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default()
}

/// A bookkeeping violation found by [`check_invariants`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation {
    pub pointer: String,
    pub message: String,
}

/// Walks the tree and reports every entity whose bookkeeping is malformed.
///
/// Entities are objects with a `$TYPE` key; `$LINK` entities carry no
/// identity and their target schemas are not descended into.
pub fn check_invariants(root: &Value) -> Vec<InvariantViolation> {
    let mut out = Vec::new();
    walk_invariants(root, &mut JsonPointer::root(), &mut out);
    out
}

fn walk_invariants(value: &Value, at: &mut JsonPointer, out: &mut Vec<InvariantViolation>) {
    let mut report = |at: &JsonPointer, message: String| {
        out.push(InvariantViolation {
            pointer: at.to_string(),
            message,
        })
    };
    match value {
        Value::Object(map) => {
            if let Some(tag) = map.get(TYPE_KEY) {
                match tag.as_str() {
                    None => report(at, format!("{TYPE_KEY} must be a string")),
                    Some(LINK_TYPE) => {
                        if let Err(e) = crate::link::LinkSpec::from_value(value) {
                            report(at, e.to_string());
                        }
                        return;
                    }
                    Some(_) => {
                        check_id_array(map.get(UUIDS_KEY), UUIDS_KEY, true, at, &mut report);
                        check_id_array(map.get(EXTRACTORS_KEY), EXTRACTORS_KEY, false, at, &mut report);
                    }
                }
            }
            for (k, v) in map {
                at.push(k.clone());
                walk_invariants(v, at, out);
                at.pop();
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                at.push(i.to_string());
                walk_invariants(v, at, out);
                at.pop();
            }
        }
        _ => {}
    }
}

fn check_id_array(
    value: Option<&Value>,
    key: &str,
    non_empty: bool,
    at: &JsonPointer,
    report: &mut impl FnMut(&JsonPointer, String),
) {
    let Some(value) = value else {
        report(at, format!("entity is missing {key}"));
        return;
    };
    let Some(items) = value.as_array() else {
        report(at, format!("{key} must be an array"));
        return;
    };
    if non_empty && items.is_empty() {
        report(at, format!("{key} must not be empty"));
    }
    let mut seen = HashSet::new();
    for item in items {
        match item.as_str() {
            None => report(at, format!("{key} must contain only strings")),
            Some(s) if !seen.insert(s) => report(at, format!("{key} contains duplicate {s:?}")),
            Some(_) => {}
        }
    }
}
