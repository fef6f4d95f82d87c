//! Brute-force reference merger used as the test oracle for aggregation.
//!
//! Deliberately naive: compatibility is decided by attempting a full merge
//! and discarding the result, numbers compare through their decimal text
//! parsed as f64, and paths are built by string concatenation.

#![allow(dead_code)]

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConflict {
    pub path: String,
}

fn esc(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn scalar_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let fx: f64 = x.to_string().parse().unwrap();
            let fy: f64 = y.to_string().parse().unwrap();
            fx == fy
        }
        _ => a == b,
    }
}

pub fn merge(a: &Value, b: &Value) -> Result<Value, OracleConflict> {
    merge_at(a, b, String::new())
}

fn merge_at(a: &Value, b: &Value, path: String) -> Result<Value, OracleConflict> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let mut out: Map<String, Value> = x.clone();
            for (k, yv) in y {
                let merged = match x.get(k) {
                    None => yv.clone(),
                    Some(xv) if k == "$uuids" || k == "$extractors" => {
                        if let (Some(xa), Some(ya)) = (xv.as_array(), yv.as_array()) {
                            let mut all = xa.clone();
                            for item in ya {
                                if !all.contains(item) {
                                    all.push(item.clone());
                                }
                            }
                            Value::Array(all)
                        } else {
                            merge_at(xv, yv, format!("{path}/{}", esc(k)))?
                        }
                    }
                    Some(xv) => merge_at(xv, yv, format!("{path}/{}", esc(k)))?,
                };
                out.insert(k.clone(), merged);
            }
            Ok(Value::Object(out))
        }
        (Value::Array(x), Value::Array(y)) => {
            let mut out = x.clone();
            for item in y {
                let mut placed = false;
                for slot in out.iter_mut() {
                    if let Ok(m) = merge(slot, item) {
                        *slot = m;
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    out.push(item.clone());
                }
            }
            Ok(Value::Array(out))
        }
        (Value::Object(_), _) | (_, Value::Object(_)) | (Value::Array(_), _) | (_, Value::Array(_)) => {
            Err(OracleConflict { path })
        }
        _ if scalar_eq(a, b) => Ok(a.clone()),
        _ => Err(OracleConflict { path }),
    }
}

/// Canonical form for "equal up to array ordering": arrays are sorted by
/// the serialized text of their (recursively canonicalized) items, objects
/// are rebuilt with sorted keys.
pub fn canonical(v: &Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<_> = map.keys().collect();
            keys.sort();
            Value::Object(keys.into_iter().map(|k| (k.clone(), canonical(&map[k]))).collect())
        }
        Value::Array(items) => {
            let mut items: Vec<Value> = items.iter().map(canonical).collect();
            items.sort_by_key(|i| i.to_string());
            Value::Array(items)
        }
        Value::Number(n) => {
            let f: f64 = n.to_string().parse().unwrap();
            if f.fract() == 0.0 && f.abs() < 1e15 {
                Value::from(f as i64)
            } else {
                v.clone()
            }
        }
        other => other.clone(),
    }
}

/// Every key path (JSON Pointer of an object member, array items elided as
/// `*`) in the value.
pub fn key_paths(v: &Value) -> std::collections::BTreeSet<String> {
    let mut out = std::collections::BTreeSet::new();
    collect(v, String::new(), &mut out);
    out
}

fn collect(v: &Value, prefix: String, out: &mut std::collections::BTreeSet<String>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let p = format!("{prefix}/{}", esc(k));
                out.insert(p.clone());
                collect(child, p, out);
            }
        }
        Value::Array(items) => {
            for child in items {
                collect(child, format!("{prefix}/*"), out);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod sanity {
    use super::*;
    use serde_json::json;

    #[test]
    fn hand_computed_cases() {
        assert_eq!(merge(&json!({"a": {"p": 1}}), &json!({"a": {"q": 2}})).unwrap(), json!({"a": {"p": 1, "q": 2}}));
        assert_eq!(merge(&json!([1, 2]), &json!([2, 3])).unwrap(), json!([1, 2, 3]));
        assert_eq!(merge(&json!({"x": 1}), &json!({"x": 2})).unwrap_err().path, "/x");
        assert_eq!(
            merge(&json!([{"name": "a", "v": 1}]), &json!([{"name": "a", "port": 9}])).unwrap(),
            json!([{"name": "a", "v": 1, "port": 9}])
        );
        assert_eq!(merge(&json!({"xs": [1]}), &json!({"xs": [2]})).unwrap(), json!({"xs": [1, 2]}));
        assert_eq!(merge(&json!(1), &json!(1.0)).unwrap(), json!(1));
    }
}
