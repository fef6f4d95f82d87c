//! Instrumented toy extractors for engine scheduling checks.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use archreco::engine::Engine;
use archreco::extractor::{ExtractorSpec, Registry, RunContext};
use archreco::model::{EntitySchema, IdGenerator, ModelEntity};
use archreco::par::ExecMode;
use archreco::Result;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use serde_json::{json, Map, Value};

/// Invocations per (extractor id, entity uuids).
pub type Calls = Arc<Mutex<HashMap<(String, Vec<String>), usize>>>;

/// Extractor `x{i}` writes `f{i}`, runs on `root` or `child` entities,
/// optionally waits for `f{needs}`, and may spawn one child.
#[derive(Debug, Clone)]
pub struct ToySpec {
    pub on_child: bool,
    pub needs: Option<usize>,
    pub spawns: bool,
}

fn toy_schema(on_child: bool, needs: Option<usize>) -> EntitySchema {
    let mut schema = json!({"properties": {"$TYPE": {"const": if on_child { "child" } else { "root" }}}});
    if let Some(j) = needs {
        schema["required"] = json!([format!("f{j}")]);
    }
    EntitySchema::new(schema).unwrap()
}

pub fn toy_registry(specs: &[ToySpec], calls: &Calls) -> Registry {
    let mut registry = Registry::new();
    for (i, spec) in specs.iter().enumerate() {
        let calls = calls.clone();
        let spawns = spec.spawns && !spec.on_child;
        let id = format!("x{i}");
        let body_id = id.clone();
        registry
            .register_extractor(ExtractorSpec::in_process(
                id,
                toy_schema(spec.on_child, spec.needs),
                move |mut e: ModelEntity, ctx: &RunContext<'_>| -> Result<ModelEntity> {
                    let uuids = e.uuids().iter().map(|s| s.to_string()).collect();
                    *calls.lock().unwrap().entry((body_id.clone(), uuids)).or_default() += 1;
                    e.insert(format!("f{i}"), json!(i));
                    if spawns {
                        let mut fields = Map::new();
                        fields.insert("name".into(), json!(format!("c{i}")));
                        let child = ctx.create_model_entity("child", fields)?;
                        e.push_to("children", child.into_value())?;
                    }
                    Ok(e)
                },
            ))
            .unwrap();
    }
    registry
}

pub fn toy_specs() -> impl Strategy<Value = Vec<ToySpec>> {
    (1usize..9).prop_flat_map(|n| {
        prop::collection::vec(
            (any::<bool>(), prop::option::of(0..n), prop::bool::weighted(0.3)).prop_map(|(on_child, needs, spawns)| ToySpec {
                on_child,
                needs,
                spawns,
            }),
            n,
        )
    })
}

/// Every entity in the tree, links excluded.
pub fn entities(v: &Value, out: &mut Vec<ModelEntity>) {
    match v {
        Value::Object(m) => {
            if m.contains_key("$uuids") {
                out.push(ModelEntity::try_from(v.clone()).unwrap());
            }
            m.values().for_each(|c| entities(c, out));
        }
        Value::Array(items) => items.iter().for_each(|c| entities(c, out)),
        _ => {}
    }
}

/// Runs a toy registry and checks: at most one call per (extractor,
/// entity), at most |extractors| + 1 passes per entity, and a fixpoint
/// at the end.
pub fn run_guarantees(specs: &[ToySpec], mode: ExecMode) -> Result<(), TestCaseError> {
    let calls: Calls = Arc::default();
    let engine = Engine::new(toy_registry(specs, &calls), IdGenerator::random()).with_mode(mode);
    let dir = tempfile::tempdir().unwrap();
    let root = engine
        .create_model_entity("root", Map::new(), dir.path())
        .map_err(|e| TestCaseError::fail(e.to_string()))?;

    for ((id, uuids), n) in calls.lock().unwrap().iter() {
        prop_assert!(*n <= 1, "{} ran {} times on {:?}", id, n, uuids);
    }
    for trace in engine.traces() {
        prop_assert!(trace.passes.len() <= specs.len() + 1, "{} passes with {} extractors", trace.passes.len(), specs.len());
    }
    let mut all = Vec::new();
    entities(root.as_value(), &mut all);
    for e in &all {
        let pending: Vec<&str> = engine.registry().matching_extractors(e).iter().map(|s| s.id.as_str()).collect();
        prop_assert!(pending.is_empty(), "{:?} still pending on {}", pending, e.as_value());
    }
    let total: usize = calls.lock().unwrap().values().sum();
    prop_assert_eq!(total, engine.summary().extractors_run);
    Ok(())
}

/// `x0` waits for `f1`, which only `x1` writes. Returns the extractors
/// executed in each pass and how often `x0` ran.
pub fn two_pass_chain() -> (Vec<Vec<String>>, usize) {
    let calls: Calls = Arc::default();
    let specs = [
        ToySpec { on_child: false, needs: Some(1), spawns: false },
        ToySpec { on_child: false, needs: None, spawns: false },
    ];
    let engine = Engine::new(toy_registry(&specs, &calls), IdGenerator::sequential());
    let dir = tempfile::tempdir().unwrap();
    engine.create_model_entity("root", Map::new(), dir.path()).unwrap();
    let traces = engine.traces();
    assert_eq!(traces.len(), 1);
    let executed = traces[0].passes.iter().map(|p| p.extractors_executed.clone()).collect();
    let x0 = calls.lock().unwrap().iter().filter(|((id, _), _)| id == "x0").map(|(_, n)| *n).sum();
    (executed, x0)
}
