//! `$LINK` entities: references expressed as a target schema plus a
//! pointer to the array the target lives in, resolved after aggregation.
//!
//! Search pointers are evaluated from the root of the aggregated model, so
//! the pointer paths are part of the model contract shared by every
//! repository that contributes to it. Resolution records what matched; it
//! never rewrites or inlines the target.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{is_link, EntitySchema, JsonPointer, ModelEntity, ModelFile, LINK_TYPE, TYPE_KEY, UUIDS_KEY};

pub const TARGET_SCHEMA_KEY: &str = "target_schema";
pub const SEARCH_POINTER_KEY: &str = "search_pointer";
pub const RESOLUTION_KEY: &str = "resolution";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkStatus {
    Resolved,
    Ambiguous,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub status: LinkStatus,
    pub matched_uuids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub target_schema: EntitySchema,
    pub search_pointer: JsonPointer,
    pub resolution: Option<Resolution>,
}

impl LinkSpec {
    pub fn new(target_schema: Value, search_pointer: &str) -> Result<Self> {
        Ok(Self {
            target_schema: EntitySchema::new(target_schema)?,
            search_pointer: JsonPointer::parse(search_pointer)?,
            resolution: None,
        })
    }

    pub fn from_value(value: &Value) -> Result<Self> {
        let invalid = |msg: &str| Error::InvalidEntity(format!("malformed link: {msg}"));
        if !is_link(value) {
            return Err(invalid("missing $TYPE \"$LINK\""));
        }
        let schema = value.get(TARGET_SCHEMA_KEY).ok_or_else(|| invalid("missing target_schema"))?;
        let pointer = value
            .get(SEARCH_POINTER_KEY)
            .and_then(Value::as_str)
            .ok_or_else(|| invalid("missing search_pointer"))?;
        let mut link = Self::new(schema.clone(), pointer)?;
        if let Some(r) = value.get(RESOLUTION_KEY) {
            link.resolution =
                Some(serde_json::from_value(r.clone()).map_err(|e| invalid(&format!("resolution: {e}")))?);
        }
        Ok(link)
    }

    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert(TYPE_KEY.into(), Value::String(LINK_TYPE.into()));
        map.insert(TARGET_SCHEMA_KEY.into(), self.target_schema.document().clone());
        map.insert(SEARCH_POINTER_KEY.into(), Value::String(self.search_pointer.to_string()));
        if let Some(r) = &self.resolution {
            map.insert(RESOLUTION_KEY.into(), serde_json::to_value(r).expect("resolution serializes"));
        }
        Value::Object(map)
    }

    /// Evaluates the link against `root` without recording anything.
    pub fn evaluate(&self, root: &Value) -> Resolution {
        let candidates = match self.search_pointer.resolve(root) {
            Some(Value::Array(items)) => items.as_slice(),
            _ => &[],
        };
        let matched: Vec<&Value> = candidates
            .iter()
            .filter(|c| self.target_schema.is_valid(c))
            .collect();
        let status = match matched.len() {
            0 => LinkStatus::Unresolved,
            1 => LinkStatus::Resolved,
            _ => LinkStatus::Ambiguous,
        };
        let mut matched_uuids: Vec<String> = Vec::new();
        for id in matched
            .iter()
            .filter_map(|m| m.get(UUIDS_KEY).and_then(Value::as_array))
            .flatten()
            .filter_map(Value::as_str)
        {
            if !matched_uuids.iter().any(|u| u == id) {
                matched_uuids.push(id.to_string());
            }
        }
        Resolution { status, matched_uuids }
    }
}

/// A well-formed, unresolved link entity.
pub fn make_link(target_schema: Value, search_pointer: &str) -> Result<Value> {
    Ok(LinkSpec::new(target_schema, search_pointer)?.to_value())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OnFailure {
    #[default]
    Record,
    Error,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkPolicy {
    pub ambiguous: OnFailure,
    pub unresolved: OnFailure,
    /// Clear every recorded resolution before resolving.
    pub re_resolve: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkDetail {
    /// Location of the link entity in the model.
    pub link: String,
    pub search_pointer: String,
    pub status: LinkStatus,
    pub matched_uuids: Vec<String>,
    /// True when the resolution was already recorded and left untouched.
    pub previously_resolved: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResolutionReport {
    pub resolved: usize,
    pub ambiguous: usize,
    pub unresolved: usize,
    pub details: Vec<LinkDetail>,
}

impl ResolutionReport {
    /// Links that violate `policy`, by location.
    pub fn violations(&self, policy: &LinkPolicy) -> Vec<String> {
        self.details
            .iter()
            .filter(|d| match d.status {
                LinkStatus::Ambiguous => policy.ambiguous == OnFailure::Error,
                LinkStatus::Unresolved => policy.unresolved == OnFailure::Error,
                LinkStatus::Resolved => false,
            })
            .map(|d| format!("{} ({:?})", d.link, d.status).to_lowercase())
            .collect()
    }

    pub fn enforce(&self, policy: &LinkPolicy) -> Result<()> {
        let offending = self.violations(policy);
        if offending.is_empty() {
            Ok(())
        } else {
            Err(Error::LinkResolution { offending })
        }
    }
}

/// Resolves every link, recording outcomes, and then applies `policy`.
pub fn resolve_links(model: &ModelFile, policy: &LinkPolicy) -> Result<(ModelFile, ResolutionReport)> {
    let (resolved, report) = record_resolutions(model, policy.re_resolve)?;
    report.enforce(policy)?;
    Ok((resolved, report))
}

/// Resolves every link without enforcing a failure policy.
pub fn record_resolutions(model: &ModelFile, re_resolve: bool) -> Result<(ModelFile, ResolutionReport)> {
    let mut root = model.root.as_value().clone();
    let locations = find_links(&root);
    if re_resolve {
        for at in &locations {
            if let Some(Value::Object(link)) = at.resolve_mut(&mut root) {
                link.shift_remove(RESOLUTION_KEY);
            }
        }
    }
    let targets = root.clone();
    let mut report = ResolutionReport::default();
    for at in locations {
        let slot = at.resolve_mut(&mut root).expect("location from walk");
        let link = LinkSpec::from_value(slot).map_err(|e| Error::InvalidEntity(format!("{at}: {e}")))?;
        let (resolution, previously_resolved) = match link.resolution {
            Some(existing) => (existing, true),
            None => {
                let r = link.evaluate(&targets);
                slot.as_object_mut()
                    .expect("link is an object")
                    .insert(RESOLUTION_KEY.into(), json!(r));
                (r, false)
            }
        };
        match resolution.status {
            LinkStatus::Resolved => report.resolved += 1,
            LinkStatus::Ambiguous => report.ambiguous += 1,
            LinkStatus::Unresolved => report.unresolved += 1,
        }
        report.details.push(LinkDetail {
            link: at.to_string(),
            search_pointer: link.search_pointer.to_string(),
            status: resolution.status,
            matched_uuids: resolution.matched_uuids,
            previously_resolved,
        });
    }
    let out = ModelFile {
        format_version: model.format_version.clone(),
        root: ModelEntity::try_from(root)?,
    };
    Ok((out, report))
}

/// Locations of all link entities, in document order.
pub fn find_links(root: &Value) -> Vec<JsonPointer> {
    fn walk(v: &Value, at: &mut JsonPointer, out: &mut Vec<JsonPointer>) {
        match v {
            Value::Object(map) => {
                if is_link(v) {
                    out.push(at.clone());
                    return;
                }
                for (k, child) in map {
                    at.push(k.clone());
                    walk(child, at, out);
                    at.pop();
                }
            }
            Value::Array(items) => {
                for (i, child) in items.iter().enumerate() {
                    at.push(i.to_string());
                    walk(child, at, out);
                    at.pop();
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(root, &mut JsonPointer::root(), &mut out);
    out
}
