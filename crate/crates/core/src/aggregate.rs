//! Recursive union of JSON values.
//!
//! Objects merge key by key, arrays merge item by item using compatibility,
//! and equal primitives collapse. Any other combination is a conflict that
//! surfaces as an error. No rule ever removes or rewrites a value.
//!
//! Array items merge with the first compatible item already present. An
//! empty object is compatible with every object and therefore folds into
//! the first object in the array; [`MergeOptions::strict`] guards against
//! that by also requiring a shared, equal primitive field.

use serde_json::{Map, Number, Value};

use crate::error::{ConflictError, Error, Result};
use crate::model::{is_bookkeeping_key, is_internal_key, JsonPointer, ModelFile};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MergeOptions {
    /// Array items that are objects merge only when they share at least
    /// one equal primitive user field.
    pub strict: bool,
}

impl MergeOptions {
    pub fn strict() -> Self {
        Self { strict: true }
    }
}

pub fn aggregate(a: &Value, b: &Value) -> Result<Value, ConflictError> {
    aggregate_with(a, b, MergeOptions::default())
}

pub fn aggregate_with(a: &Value, b: &Value, opts: MergeOptions) -> Result<Value, ConflictError> {
    let mut out = a.clone();
    merge_into(&mut out, b.clone(), opts)?;
    Ok(out)
}

/// Merges `incoming` into `target` in place. On error `target` may hold a
/// partial merge.
pub fn merge_into(target: &mut Value, incoming: Value, opts: MergeOptions) -> Result<(), ConflictError> {
    merge_at(target, incoming, &mut JsonPointer::root(), opts)
}

/// True iff [`aggregate`] would succeed. Allocates nothing.
pub fn compatible(a: &Value, b: &Value) -> bool {
    first_conflict(a, b, &mut JsonPointer::root()).is_none()
}

pub fn merge_arrays(a: &[Value], b: &[Value]) -> Vec<Value> {
    merge_arrays_with(a, b, MergeOptions::default())
}

pub fn merge_arrays_with(a: &[Value], b: &[Value], opts: MergeOptions) -> Vec<Value> {
    let mut out = a.to_vec();
    for item in b {
        union_item(&mut out, item.clone(), opts);
    }
    out
}

fn union_item(items: &mut Vec<Value>, item: Value, opts: MergeOptions) {
    match items.iter().position(|existing| mergeable_items(existing, &item, opts)) {
        Some(i) => {
            merge_at(&mut items[i], item, &mut JsonPointer::root(), opts)
                .expect("compatible items always merge");
        }
        None => items.push(item),
    }
}

fn mergeable_items(a: &Value, b: &Value, opts: MergeOptions) -> bool {
    if !compatible(a, b) {
        return false;
    }
    match (a, b) {
        (Value::Object(x), Value::Object(y)) if opts.strict => shares_primitive(x, y),
        _ => true,
    }
}

fn shares_primitive(x: &Map<String, Value>, y: &Map<String, Value>) -> bool {
    x.iter().any(|(k, xv)| {
        !is_internal_key(k)
            && is_primitive(xv)
            && y.get(k).is_some_and(|yv| is_primitive(yv) && primitives_equal(xv, yv))
    })
}

fn merge_at(target: &mut Value, incoming: Value, at: &mut JsonPointer, opts: MergeOptions) -> Result<(), ConflictError> {
    match (target, incoming) {
        (Value::Object(left), Value::Object(right)) => {
            for (key, value) in right {
                match left.get_mut(&key) {
                    None => {
                        left.insert(key, value);
                    }
                    Some(existing) => {
                        at.push(key.clone());
                        if is_bookkeeping_key(&key) && existing.is_array() && value.is_array() {
                            set_union(existing, value);
                        } else {
                            merge_at(existing, value, at, opts)?;
                        }
                        at.pop();
                    }
                }
            }
            Ok(())
        }
        (Value::Array(left), Value::Array(right)) => {
            for item in right {
                union_item(left, item, opts);
            }
            Ok(())
        }
        (left, right) if is_primitive(left) && is_primitive(&right) && primitives_equal(left, &right) => Ok(()),
        (left, right) => Err(ConflictError::new(at.to_string(), left.clone(), right)),
    }
}

fn first_conflict(a: &Value, b: &Value, at: &mut JsonPointer) -> Option<ConflictError> {
    match (a, b) {
        (Value::Object(left), Value::Object(right)) => {
            for (key, value) in right {
                let Some(existing) = left.get(key) else { continue };
                if is_bookkeeping_key(key) && existing.is_array() && value.is_array() {
                    continue;
                }
                at.push(key.clone());
                let found = first_conflict(existing, value, at);
                at.pop();
                if found.is_some() {
                    return found;
                }
            }
            None
        }
        (Value::Array(_), Value::Array(_)) => None,
        (l, r) if is_primitive(l) && is_primitive(r) && primitives_equal(l, r) => None,
        (l, r) => Some(ConflictError::new(at.to_string(), l.clone(), r.clone())),
    }
}

/// The conflict [`aggregate`] would report, without building the output.
pub fn find_conflict(a: &Value, b: &Value) -> Option<ConflictError> {
    first_conflict(a, b, &mut JsonPointer::root())
}

fn set_union(existing: &mut Value, incoming: Value) {
    if let (Value::Array(left), Value::Array(right)) = (existing, incoming) {
        for item in right {
            if !left.contains(&item) {
                left.push(item);
            }
        }
    }
}

fn is_primitive(v: &Value) -> bool {
    !matches!(v, Value::Object(_) | Value::Array(_))
}

fn primitives_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => numbers_equal(x, y),
        _ => a == b,
    }
}

/// Mathematical equality: `1` equals `1.0`.
fn numbers_equal(x: &Number, y: &Number) -> bool {
    if let (Some(a), Some(b)) = (x.as_i64(), y.as_i64()) {
        return a == b;
    }
    if let (Some(a), Some(b)) = (x.as_u64(), y.as_u64()) {
        return a == b;
    }
    match (x.as_f64(), y.as_f64()) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// Left fold of [`aggregate`] over model roots, in input order.
///
/// Each input is paired with a display name; a conflict names the input
/// being merged and the earliest prior input holding a value at the
/// conflicting path.
pub fn aggregate_models(inputs: &[(String, ModelFile)], opts: MergeOptions) -> Result<ModelFile> {
    let Some(((_, first), rest)) = inputs.split_first() else {
        return Err(Error::InvalidEntity("aggregation needs at least one model".into()));
    };
    let mut acc = first.root.as_value().clone();
    for (i, (name, model)) in rest.iter().enumerate() {
        if model.format_version != first.format_version {
            return Err(Error::Version {
                found: model.format_version.clone(),
                expected: first.format_version.clone(),
            });
        }
        let incoming = model.root.as_value();
        if let Some(conflict) = find_conflict(&acc, incoming) {
            let left = inputs[..=i]
                .iter()
                .find(|(_, m)| {
                    JsonPointer::parse(&conflict.path)
                        .ok()
                        .and_then(|p| p.resolve(m.root.as_value()).cloned())
                        .is_some()
                })
                .map(|(n, _)| n.clone())
                .unwrap_or_else(|| "earlier inputs".into());
            return Err(conflict.with_origins(left, name.clone()).into());
        }
        merge_into(&mut acc, incoming.clone(), opts)?;
    }
    let root = crate::model::ModelEntity::try_from(acc)?;
    Ok(ModelFile {
        format_version: first.format_version.clone(),
        root,
    })
}
