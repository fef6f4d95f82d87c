//! Property bodies shared by the property suites and the acceptance run.

use std::collections::BTreeSet;

use archreco::aggregate::{aggregate, compatible, find_conflict};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use serde_json::Value;

use super::gen::{at_most_one_partner, Pair};
use super::oracle::{self, canonical, key_paths};

type Outcome = Result<(), TestCaseError>;

pub fn matches_oracle(a: &Value, b: &Value) -> Outcome {
    match (aggregate(a, b), oracle::merge(a, b)) {
        (Ok(got), Ok(want)) => prop_assert_eq!(canonical(&got), canonical(&want)),
        (Err(got), Err(want)) => prop_assert_eq!(got.path, want.path),
        (got, want) => prop_assert!(false, "implementation {got:?} vs oracle {want:?}"),
    }
    Ok(())
}

pub fn idempotent(m: &Value) -> Outcome {
    let merged = aggregate(m, m).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(canonical(&merged), canonical(m));
    Ok(())
}

/// Key paths never disappear; left-operand leaves keep their exact
/// position and value, right-operand leaves outside arrays keep theirs.
pub fn monotone(a: &Value, b: &Value) -> Outcome {
    let Ok(merged) = aggregate(a, b) else { return Ok(()) };
    let paths = key_paths(&merged);
    let mut inputs: BTreeSet<String> = key_paths(a);
    inputs.extend(key_paths(b));
    prop_assert!(inputs.is_subset(&paths), "lost {:?}", inputs.difference(&paths).collect::<Vec<_>>());

    let mut left = Vec::new();
    leaves(a, String::new(), false, &mut left);
    let mut right = Vec::new();
    leaves(b, String::new(), false, &mut right);
    let right = right.into_iter().filter(|(_, in_array, _)| !in_array);
    for (at, _, v) in left.into_iter().chain(right) {
        let now = merged.pointer(&at);
        prop_assert!(now.is_some_and(|n| numerically_equal(n, &v)), "{} changed: {:?} -> {:?}", at, v, now);
    }
    Ok(())
}

pub fn failure_symmetric(a: &Value, b: &Value) -> Outcome {
    prop_assert_eq!(aggregate(a, b).is_err(), aggregate(b, a).is_err());
    Ok(())
}

pub fn commutative(a: &Value, b: &Value) -> Outcome {
    prop_assert!(at_most_one_partner(a, b), "generator broke its promise: {} / {}", a, b);
    match (aggregate(a, b), aggregate(b, a)) {
        (Ok(ab), Ok(ba)) => prop_assert_eq!(canonical(&ab), canonical(&ba)),
        (Err(_), Err(_)) => {}
        (x, y) => prop_assert!(false, "{x:?} vs {y:?}"),
    }
    Ok(())
}

pub fn compatible_iff_aggregates(a: &Value, b: &Value) -> Outcome {
    prop_assert_eq!(compatible(a, b), aggregate(a, b).is_ok());
    prop_assert_eq!(find_conflict(a, b).map(|c| c.path), aggregate(a, b).err().map(|c| c.path));
    Ok(())
}

pub fn forced_conflict_at_pointer(p: &Pair) -> Outcome {
    let err = aggregate(&p.left, &p.right).map(|_| ()).err();
    let Some(err) = err else {
        return Err(TestCaseError::fail(format!("no conflict for {}", p.pointer)));
    };
    prop_assert_eq!(&err.path, &p.pointer);
    prop_assert_eq!(p.left.pointer(&p.pointer), Some(&*err.left_value));
    prop_assert_eq!(p.right.pointer(&p.pointer), Some(&*err.right_value));
    prop_assert_eq!(oracle::merge(&p.left, &p.right).map(|_| ()).unwrap_err().path, p.pointer.clone());
    Ok(())
}

pub fn conflict_free_merges(p: &Pair) -> Outcome {
    let merged = aggregate(&p.left, &p.right);
    prop_assert!(merged.is_ok(), "false positive: {:?}", merged);
    let want = oracle::merge(&p.left, &p.right).map_err(|c| TestCaseError::fail(format!("oracle conflict at {}", c.path)))?;
    prop_assert_eq!(canonical(&merged.unwrap()), canonical(&want));
    Ok(())
}

fn leaves(v: &Value, at: String, in_array: bool, out: &mut Vec<(String, bool, Value)>) {
    match v {
        Value::Object(m) => {
            for (k, c) in m {
                leaves(c, format!("{at}/{}", k.replace('~', "~0").replace('/', "~1")), in_array, out);
            }
        }
        Value::Array(items) => {
            for (i, c) in items.iter().enumerate() {
                leaves(c, format!("{at}/{i}"), true, out);
            }
        }
        p => out.push((at, in_array, p.clone())),
    }
}

fn numerically_equal(a: &Value, b: &Value) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}
