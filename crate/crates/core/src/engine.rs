//! The reconstruction loop.
//!
//! `create_model_entity` gives a new entity its identity and hands it to
//! `run_extractors`, which repeats passes until no extractor matches:
//!
//! 1. every matching extractor runs on its own copy of the pass snapshot;
//! 2. each output is reduced to an additive [`Delta`] against the snapshot;
//! 3. deltas are checked pairwise for conflicts and aggregated onto the
//!    snapshot, and the extractor ids are recorded in `$extractors`;
//! 4. sub-entities that are new or changed after the merge are run through
//!    the same loop before the next pass starts.
//!
//! Because extractors of one pass never see each other's output, running
//! them concurrently gives the same result as running them in order.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::aggregate::{find_conflict, merge_into, MergeOptions};
use crate::error::{Error, Result};
use crate::extractor::{Registry, RunContext};
use crate::model::{is_bookkeeping_key, is_link, IdGenerator, JsonPointer, ModelEntity, UUIDS_KEY};
use crate::par::{map_ordered, ExecMode};

/// Entities nested deeper than this abort the run.
pub const MAX_DEPTH: usize = 32;

/// The additive change one extractor made to a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta {
    pub extractor_id: String,
    pub changes: Value,
}

impl Delta {
    pub fn is_empty(&self) -> bool {
        self.changes.as_object().is_none_or(Map::is_empty)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassReport {
    pub pass_index: usize,
    pub extractors_executed: Vec<String>,
    pub entity_modified: bool,
    pub subentities_recursed: usize,
}

/// All passes `run_extractors` made over one entity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityTrace {
    pub uuids: Vec<String>,
    pub type_tag: Option<String>,
    pub depth: usize,
    pub passes: Vec<PassReport>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub entities_created: usize,
    pub extractors_run: usize,
    pub passes: usize,
}

pub struct Engine {
    registry: Registry,
    ids: IdGenerator,
    mode: ExecMode,
    entities_created: AtomicUsize,
    extractors_run: AtomicUsize,
    passes: AtomicUsize,
    traces: Mutex<Vec<EntityTrace>>,
}

impl Engine {
    pub fn new(registry: Registry, ids: IdGenerator) -> Self {
        Self {
            registry,
            ids,
            mode: ExecMode::default(),
            entities_created: AtomicUsize::new(0),
            extractors_run: AtomicUsize::new(0),
            passes: AtomicUsize::new(0),
            traces: Mutex::new(Vec::new()),
        }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn ids(&self) -> &IdGenerator {
        &self.ids
    }

    pub fn mode(&self) -> ExecMode {
        self.mode
    }

    /// Sequential ids are handed out in call order, so deterministic runs
    /// keep extractors of a pass on one thread.
    fn pass_schedule(&self) -> ExecMode {
        if self.ids.is_deterministic() {
            ExecMode::Sequential
        } else {
            self.mode
        }
    }

    pub fn create_model_entity(&self, type_tag: &str, fields: Map<String, Value>, repo_root: &Path) -> Result<ModelEntity> {
        self.create_at(type_tag, fields, repo_root, 0)
    }

    pub fn run_extractors(&self, entity: ModelEntity, repo_root: &Path) -> Result<ModelEntity> {
        self.run_at(entity, repo_root, 0)
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            entities_created: self.entities_created.load(Ordering::SeqCst),
            extractors_run: self.extractors_run.load(Ordering::SeqCst),
            passes: self.passes.load(Ordering::SeqCst),
        }
    }

    pub fn traces(&self) -> Vec<EntityTrace> {
        self.traces.lock().expect("trace lock").clone()
    }

    pub(crate) fn create_at(&self, type_tag: &str, fields: Map<String, Value>, repo_root: &Path, depth: usize) -> Result<ModelEntity> {
        let entity = ModelEntity::new(type_tag, fields, &self.ids)?;
        self.entities_created.fetch_add(1, Ordering::SeqCst);
        self.run_at(entity, repo_root, depth)
    }

    fn run_at(&self, mut entity: ModelEntity, repo_root: &Path, depth: usize) -> Result<ModelEntity> {
        if depth >= MAX_DEPTH {
            return Err(Error::DepthLimit { limit: MAX_DEPTH });
        }
        let ctx = RunContext {
            repo_root,
            engine: self,
            depth,
        };
        let mut passes = Vec::new();
        for pass_index in 0.. {
            self.passes.fetch_add(1, Ordering::SeqCst);
            let matches = self.registry.matching_extractors(&entity);
            if matches.is_empty() {
                passes.push(PassReport {
                    pass_index,
                    extractors_executed: Vec::new(),
                    entity_modified: false,
                    subentities_recursed: 0,
                });
                break;
            }
            log::debug!(
                "pass {pass_index} on {:?} {:?}: {:?}",
                entity.type_tag(),
                entity.uuids(),
                matches.iter().map(|s| &s.id).collect::<Vec<_>>()
            );

            let snapshot = entity;
            let outputs = map_ordered(self.pass_schedule(), &matches, |spec| {
                spec.invoke(snapshot.clone(), &ctx)
            });
            self.extractors_run.fetch_add(matches.len(), Ordering::SeqCst);

            let mut deltas = Vec::with_capacity(matches.len());
            for (spec, output) in matches.iter().zip(outputs) {
                deltas.push(compute_delta(&snapshot, &output?, &spec.id)?);
            }
            check_pairwise(&deltas)?;

            let mut merged = snapshot.as_value().clone();
            for delta in &deltas {
                merge_into(&mut merged, delta.changes.clone(), MergeOptions::default()).map_err(|c| {
                    Error::Conflict(c.with_origins("pass merge", delta.extractor_id.clone()))
                })?;
            }
            let mut merged = ModelEntity::try_from(merged)?;
            for spec in &matches {
                merged.record_extractor(&spec.id);
            }

            let recursed = self.recurse_changed(&mut merged, &snapshot, repo_root, depth)?;
            passes.push(PassReport {
                pass_index,
                extractors_executed: matches.iter().map(|s| s.id.clone()).collect(),
                entity_modified: deltas.iter().any(|d| !d.is_empty()),
                subentities_recursed: recursed,
            });
            entity = merged;
        }
        self.traces.lock().expect("trace lock").push(EntityTrace {
            uuids: entity.uuids().into_iter().map(String::from).collect(),
            type_tag: entity.type_tag().map(String::from),
            depth,
            passes,
        });
        Ok(entity)
    }

    /// Runs the loop on every nearest sub-entity of `merged` that is new or
    /// differs from its counterpart (same `$uuids`) in `snapshot`.
    fn recurse_changed(&self, merged: &mut ModelEntity, snapshot: &ModelEntity, repo_root: &Path, depth: usize) -> Result<usize> {
        let before: HashMap<Vec<String>, &Value> = nearest_subentities(snapshot.as_value())
            .into_iter()
            .filter_map(|p| p.resolve(snapshot.as_value()).map(|v| (uuid_key(v), v)))
            .collect();
        let mut count = 0;
        let mut root_value = Value::Object(std::mem::take(merged.fields_mut()));
        for pointer in nearest_subentities(&root_value) {
            let current = pointer.resolve(&root_value).expect("pointer from walk");
            if before.get(&uuid_key(current)) == Some(&current) {
                continue;
            }
            let child = ModelEntity::try_from(current.clone())?;
            let updated = self.run_at(child, repo_root, depth + 1)?;
            *pointer.resolve_mut(&mut root_value).expect("pointer from walk") = updated.into_value();
            count += 1;
        }
        *merged = ModelEntity::try_from(root_value)?;
        Ok(count)
    }
}

fn uuid_key(entity: &Value) -> Vec<String> {
    let mut ids: Vec<String> = entity
        .get(UUIDS_KEY)
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(|v| v.as_str().map(String::from)).collect())
        .unwrap_or_default();
    ids.sort();
    ids
}

/// Pointers to entities (objects with `$uuids`) below `root` that are not
/// themselves inside another such entity. Link entities are skipped.
pub(crate) fn nearest_subentities(root: &Value) -> Vec<JsonPointer> {
    fn walk(v: &Value, at: &mut JsonPointer, out: &mut Vec<JsonPointer>, top: bool) {
        match v {
            Value::Object(map) => {
                if !top {
                    if is_link(v) {
                        return;
                    }
                    if map.get(UUIDS_KEY).is_some_and(Value::is_array) {
                        out.push(at.clone());
                        return;
                    }
                }
                for (k, child) in map {
                    if is_bookkeeping_key(k) {
                        continue;
                    }
                    at.push(k.clone());
                    walk(child, at, out, false);
                    at.pop();
                }
            }
            Value::Array(items) => {
                for (i, child) in items.iter().enumerate() {
                    at.push(i.to_string());
                    walk(child, at, out, false);
                    at.pop();
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(root, &mut JsonPointer::root(), &mut out, true);
    out
}

fn check_pairwise(deltas: &[Delta]) -> Result<()> {
    for (j, later) in deltas.iter().enumerate() {
        for earlier in &deltas[..j] {
            if let Some(conflict) = find_conflict(&earlier.changes, &later.changes) {
                return Err(conflict
                    .with_origins(earlier.extractor_id.clone(), later.extractor_id.clone())
                    .into());
            }
        }
    }
    Ok(())
}

/// Reduces `output` to the additions it makes over `snapshot`.
///
/// Removing a key, rewriting a primitive, changing a value's kind, dropping
/// or rewriting an array item, or touching `$uuids`/`$extractors` is an
/// [`Error::IllegalMutation`].
pub fn compute_delta(snapshot: &ModelEntity, output: &ModelEntity, extractor_id: &str) -> Result<Delta> {
    let changes = diff(snapshot.as_value(), output.as_value(), &mut JsonPointer::root())
        .map_err(|(path, message)| Error::IllegalMutation {
            extractor: extractor_id.to_string(),
            path,
            message,
        })?
        .unwrap_or_else(|| Value::Object(Map::new()));
    Ok(Delta {
        extractor_id: extractor_id.to_string(),
        changes,
    })
}

type DiffResult = std::result::Result<Option<Value>, (String, String)>;

fn diff(before: &Value, after: &Value, at: &mut JsonPointer) -> DiffResult {
    let fail = |at: &JsonPointer, msg: String| Err((at.to_string(), msg));
    match (before, after) {
        (Value::Object(b), Value::Object(a)) => {
            if let Some(removed) = b.keys().find(|k| !a.contains_key(*k)) {
                return fail(&at.child(removed.clone()), "key removed".into());
            }
            let mut changes = Map::new();
            for (k, av) in a {
                match b.get(k) {
                    None => {
                        changes.insert(k.clone(), av.clone());
                    }
                    Some(bv) if is_bookkeeping_key(k) => {
                        if bv != av {
                            return fail(&at.child(k.clone()), format!("{k} may not be modified by extractors"));
                        }
                    }
                    Some(bv) => {
                        at.push(k.clone());
                        let sub = diff(bv, av, at)?;
                        at.pop();
                        if let Some(sub) = sub {
                            changes.insert(k.clone(), sub);
                        }
                    }
                }
            }
            Ok((!changes.is_empty()).then_some(Value::Object(changes)))
        }
        (Value::Array(b), Value::Array(a)) => diff_arrays(b, a, at),
        (Value::Object(_) | Value::Array(_), _) | (_, Value::Object(_) | Value::Array(_)) => fail(
            at,
            format!(
                "{} replaced by {}",
                crate::model::kind(before),
                crate::model::kind(after)
            ),
        ),
        _ if crate::aggregate::compatible(before, after) => Ok(None),
        _ => fail(at, format!("value {before} rewritten to {after}")),
    }
}

fn diff_arrays(before: &[Value], after: &[Value], at: &mut JsonPointer) -> DiffResult {
    let mut exact = vec![false; after.len()];
    let mut claimed = vec![false; after.len()];
    let mut unmatched = Vec::new();
    for (bi, item) in before.iter().enumerate() {
        match (0..after.len()).find(|&j| !claimed[j] && after[j] == *item) {
            Some(j) => {
                exact[j] = true;
                claimed[j] = true;
            }
            None => unmatched.push(bi),
        }
    }
    // Items that are not unchanged must have been extended in place: an
    // entity keeps its `$uuids`; anything else must diff cleanly.
    for bi in unmatched {
        let item = &before[bi];
        at.push(bi.to_string());
        let partner = if item.get(UUIDS_KEY).is_some() {
            let j = (0..after.len()).find(|&j| !claimed[j] && after[j].get(UUIDS_KEY) == item.get(UUIDS_KEY));
            if let Some(j) = j {
                diff(item, &after[j], at)?;
            }
            j
        } else {
            (0..after.len()).find(|&j| !claimed[j] && diff(item, &after[j], &mut at.clone()).is_ok())
        };
        match partner {
            Some(j) => claimed[j] = true,
            None => return Err((at.to_string(), "array item removed or rewritten".into())),
        }
        at.pop();
    }
    let added: Vec<Value> = after
        .iter()
        .zip(&exact)
        .filter(|(_, &same)| !same)
        .map(|(v, _)| v.clone())
        .collect();
    Ok((!added.is_empty()).then_some(Value::Array(added)))
}
