//! proptest strategies for JSON models.

use proptest::prelude::*;
use archreco::model::pointer::escape;
use serde_json::{json, Map, Value};

use super::oracle;

/// Few keys and few scalars, so random pairs overlap and collide often.
pub fn key() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["name", "k1", "k2", "a/b", "t~x", "$uuids"]).prop_map(str::to_owned)
}

pub fn scalar() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::Bool),
        (0i64..3).prop_map(Value::from),
        Just(json!(1.0)),
        Just(json!(2.5)),
        prop::sample::select(vec!["x", "y"]).prop_map(Value::from),
    ]
}

pub fn value() -> impl Strategy<Value = Value> {
    scalar().prop_recursive(4, 32, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Value::Array),
            prop::collection::vec((key(), inner), 0..4).prop_map(object),
        ]
    })
}

/// Objects at the top, as models are.
pub fn model() -> impl Strategy<Value = Value> {
    prop::collection::vec((key(), value()), 0..5).prop_map(object)
}

fn object(members: Vec<(String, Value)>) -> Value {
    let mut map = Map::new();
    for (k, v) in members {
        map.insert(k, v);
    }
    Value::Object(map)
}

/// Drops array items compatible with an earlier sibling, bottom up, so no
/// array holds two items that aggregation would fold together.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        Value::Array(items) => {
            let mut kept: Vec<Value> = Vec::new();
            for item in items.into_iter().map(normalize) {
                if kept.iter().all(|k| oracle::merge(k, &item).is_err()) {
                    kept.push(item);
                }
            }
            Value::Array(kept)
        }
        other => other,
    }
}

pub fn well_formed_model() -> impl Strategy<Value = Value> {
    model().prop_map(normalize)
}

/// Values whose arrays hold either distinct scalars or objects keyed by a
/// distinct `id`. Items sharing an id across two such values are the only
/// candidates for merging.
pub fn keyed_value() -> impl Strategy<Value = Value> {
    scalar().prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::btree_map(0i64..4, prop::collection::vec((key(), inner.clone()), 0..3), 0..3).prop_map(
                |items| {
                    Value::Array(
                        items
                            .into_iter()
                            .map(|(id, members)| {
                                let mut obj = object(members);
                                obj.as_object_mut().unwrap().insert("id".into(), json!(id));
                                obj
                            })
                            .collect(),
                    )
                }
            ),
            prop::collection::btree_set(0i64..5, 0..4).prop_map(|s| Value::Array(s.into_iter().map(Value::from).collect())),
            prop::collection::vec((key(), inner), 0..4).prop_map(object),
        ]
    })
}

pub fn keyed_model() -> impl Strategy<Value = Value> {
    prop::collection::vec((key(), keyed_value()), 0..5).prop_map(object)
}

/// True when every array item in `a` or `b` has at most one compatible
/// partner in the corresponding array of the other value and none among
/// its own siblings.
pub fn at_most_one_partner(a: &Value, b: &Value) -> bool {
    fn siblings_ok(items: &[Value]) -> bool {
        items
            .iter()
            .enumerate()
            .all(|(i, x)| items[i + 1..].iter().all(|y| oracle::merge(x, y).is_err()))
    }
    fn arrays_in(v: &Value) -> bool {
        match v {
            Value::Object(m) => m.values().all(arrays_in),
            Value::Array(items) => siblings_ok(items) && items.iter().all(arrays_in),
            _ => true,
        }
    }
    fn pair(a: &Value, b: &Value) -> bool {
        match (a, b) {
            (Value::Object(x), Value::Object(y)) => x.iter().all(|(k, xv)| y.get(k).is_none_or(|yv| pair(xv, yv))),
            (Value::Array(x), Value::Array(y)) => {
                let partners = |l: &Value, r: &[Value]| r.iter().filter(|i| oracle::merge(l, i).is_ok()).count();
                x.iter().all(|i| partners(i, y) <= 1)
                    && y.iter().all(|i| partners(i, x) <= 1)
                    && x.iter().all(|i| y.iter().filter(|j| oracle::merge(i, j).is_ok()).all(|j| pair(i, j)))
            }
            _ => true,
        }
    }
    arrays_in(a) && arrays_in(b) && pair(a, b)
}

// Conflict pairs.

/// Path segments deliberately include characters that need escaping.
fn segment() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["svc", "ports", "a/b", "m~n", "deep", "x"]).prop_map(str::to_owned)
}

fn leaf() -> impl Strategy<Value = Value> {
    prop_oneof![
        any::<i32>().prop_map(Value::from),
        any::<bool>().prop_map(Value::Bool),
        "[a-z]{1,6}".prop_map(Value::from),
        Just(Value::Null),
    ]
}

/// Side members: keys prefixed per side so they never collide, plus
/// arrays, which never conflict.
fn side(prefix: &'static str) -> impl Strategy<Value = Vec<(String, Value)>> {
    prop::collection::vec(
        (
            "[a-z]{1,3}".prop_map(move |k| format!("{prefix}{k}")),
            prop_oneof![leaf(), prop::collection::vec(leaf(), 0..3).prop_map(Value::Array)],
        ),
        0..3,
    )
}

#[derive(Debug, Clone)]
pub struct Pair {
    pub left: Value,
    pub right: Value,
    pub pointer: String,
}

/// Two objects sharing a chain of keys down to one scalar slot, decorated
/// with disjoint side members at every level.
pub fn conflict_pair(conflicting: bool) -> impl Strategy<Value = Pair> {
    (
        prop::collection::vec(segment(), 1..7),
        prop::collection::vec((side("l_"), side("r_")), 7),
        leaf(),
        leaf(),
    )
        .prop_filter("forced values must differ", move |(_, _, a, b)| !conflicting || a != b)
        .prop_map(move |(path, sides, a, b)| {
            let right_leaf = if conflicting { b } else { a.clone() };
            let mut left = a;
            let mut right = right_leaf;
            for (depth, key) in path.iter().enumerate().rev() {
                let (ls, rs) = &sides[depth];
                left = wrap(key, left, ls);
                right = wrap(key, right, rs);
            }
            let pointer = path.iter().map(|k| format!("/{}", escape(k))).collect();
            Pair { left, right, pointer }
        })
}

fn wrap(key: &str, inner: Value, side: &[(String, Value)]) -> Value {
    let mut map = Map::new();
    for (k, v) in side {
        map.insert(k.clone(), v.clone());
    }
    map.insert(key.to_string(), inner);
    Value::Object(map)
}

