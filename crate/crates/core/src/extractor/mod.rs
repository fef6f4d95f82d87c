//! Extractor registration, schema-gated dispatch and invocation.
//!
//! An extractor receives a copy of an entity and returns it with
//! information added. Extractors must be stateless: the output may depend
//! only on the input entity and the (read-only) repository contents. The
//! engine relies on this to run extractors of one pass concurrently.

mod external;

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde_json::{Map, Value};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::model::{EntitySchema, ModelEntity, PATH_KEY};
use crate::scan::Scanner;

pub use external::{invoke_external, ExternalRequest};

pub const DEFAULT_EXTERNAL_TIMEOUT: Duration = Duration::from_secs(60);

pub type ExtractorFn = dyn Fn(ModelEntity, &RunContext<'_>) -> Result<ModelEntity> + Send + Sync;

/// A program run once per entity, speaking JSON over stdin/stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalCommand {
    pub argv: Vec<String>,
    pub timeout: Duration,
}

impl ExternalCommand {
    pub fn new<I, S>(argv: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
        if argv.is_empty() {
            return Err(Error::Registration("external command argv is empty".into()));
        }
        Ok(Self {
            argv,
            timeout: DEFAULT_EXTERNAL_TIMEOUT,
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

#[derive(Clone)]
pub enum ExtractorBody {
    InProcess(Arc<ExtractorFn>),
    External(ExternalCommand),
}

impl fmt::Debug for ExtractorBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractorBody::InProcess(_) => f.write_str("InProcess(..)"),
            ExtractorBody::External(cmd) => f.debug_tuple("External").field(cmd).finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtractorSpec {
    pub id: String,
    pub input_schema: EntitySchema,
    pub body: ExtractorBody,
    /// Reserved. Repeatable execution is not supported and registration
    /// rejects specs that request it.
    pub repeatable: bool,
}

impl ExtractorSpec {
    pub fn in_process<F>(id: impl Into<String>, input_schema: EntitySchema, f: F) -> Self
    where
        F: Fn(ModelEntity, &RunContext<'_>) -> Result<ModelEntity> + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            input_schema,
            body: ExtractorBody::InProcess(Arc::new(f)),
            repeatable: false,
        }
    }

    pub fn external(id: impl Into<String>, input_schema: EntitySchema, command: ExternalCommand) -> Self {
        Self {
            id: id.into(),
            input_schema,
            body: ExtractorBody::External(command),
            repeatable: false,
        }
    }

    pub fn accepts(&self, entity: &ModelEntity) -> bool {
        self.input_schema.is_valid(entity.as_value())
    }

    /// Runs the body on `entity`. Failures other than engine-level errors
    /// are reported as [`Error::Extractor`] carrying this extractor's id.
    pub fn invoke(&self, entity: ModelEntity, ctx: &RunContext<'_>) -> Result<ModelEntity> {
        match &self.body {
            ExtractorBody::InProcess(f) => f(entity, ctx).map_err(|e| {
                if e.is_engine_error() {
                    e
                } else {
                    Error::Extractor {
                        id: self.id.clone(),
                        message: e.to_string(),
                        exit_code: None,
                        stderr: String::new(),
                    }
                }
            }),
            ExtractorBody::External(cmd) => invoke_external(&self.id, cmd, entity, ctx.repo_root()),
        }
    }
}

/// Ordered set of extractors. Registration order is execution order.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    specs: Vec<Arc<ExtractorSpec>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_extractor(&mut self, spec: ExtractorSpec) -> Result<()> {
        if spec.id.is_empty() {
            return Err(Error::Registration("extractor id is empty".into()));
        }
        if self.get(&spec.id).is_some() {
            return Err(Error::Registration(format!("duplicate extractor id {:?}", spec.id)));
        }
        if spec.repeatable {
            return Err(Error::Registration(format!(
                "extractor {:?} requests repeatable execution, which is not supported",
                spec.id
            )));
        }
        self.specs.push(Arc::new(spec));
        Ok(())
    }

    /// Builder-style [`Registry::register_extractor`].
    pub fn with(mut self, spec: ExtractorSpec) -> Result<Self> {
        self.register_extractor(spec)?;
        Ok(self)
    }

    pub fn get(&self, id: &str) -> Option<&ExtractorSpec> {
        self.specs.iter().find(|s| s.id == id).map(AsRef::as_ref)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.specs.iter().map(|s| s.id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ExtractorSpec> {
        self.specs.iter().map(AsRef::as_ref)
    }

    /// Extractors, in registration order, whose schema accepts `entity` and
    /// which have not yet run on it (or on any entity merged into it).
    pub fn matching_extractors(&self, entity: &ModelEntity) -> Vec<&ExtractorSpec> {
        let already_run = entity.extractors_run();
        self.iter()
            .filter(|s| !already_run.contains(&s.id.as_str()) && s.accepts(entity))
            .collect()
    }
}

/// What an extractor can reach while it runs.
pub struct RunContext<'a> {
    pub(crate) repo_root: &'a Path,
    pub(crate) engine: &'a Engine,
    pub(crate) depth: usize,
}

impl<'a> RunContext<'a> {
    pub fn repo_root(&self) -> &Path {
        self.repo_root
    }

    /// Scan helpers rooted at the repository.
    pub fn scan(&self) -> Scanner {
        Scanner::new(self.repo_root).with_mode(self.engine.mode())
    }

    /// Scan helpers rooted at `rel` inside the repository.
    pub fn scan_at(&self, rel: &str) -> Scanner {
        Scanner::new(self.resolve(rel)).with_mode(self.engine.mode())
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        if rel.is_empty() || rel == "." {
            self.repo_root.to_path_buf()
        } else {
            self.repo_root.join(rel)
        }
    }

    /// The entity's `$path`, if it has a string one.
    pub fn entity_path<'e>(&self, entity: &'e ModelEntity) -> Option<&'e str> {
        entity.get(PATH_KEY).and_then(Value::as_str)
    }

    /// Creates a sub-entity and immediately runs the matching extractors on
    /// it, one nesting level below the entity being extracted.
    pub fn create_model_entity(&self, type_tag: &str, fields: Map<String, Value>) -> Result<ModelEntity> {
        self.engine
            .create_at(type_tag, fields, self.repo_root, self.depth + 1)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IdGenerator;
    use serde_json::json;

    fn java_schema() -> EntitySchema {
        EntitySchema::new(json!({
            "properties": {"$TYPE": {"const": "microservice"}, "$path": {"type": "string"}},
            "required": ["$path"]
        }))
        .unwrap()
    }

    fn noop(id: &str, schema: EntitySchema) -> ExtractorSpec {
        ExtractorSpec::in_process(id, schema, |e, _| Ok(e))
    }

    fn entity(v: Value) -> ModelEntity {
        ModelEntity::try_from(v).unwrap()
    }

    #[test]
    fn register_one() {
        let mut r = Registry::new();
        r.register_extractor(noop("java-detector", java_schema())).unwrap();
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn duplicate_id_rejected() {
        let mut r = Registry::new();
        r.register_extractor(noop("x", EntitySchema::any())).unwrap();
        assert!(matches!(
            r.register_extractor(noop("x", EntitySchema::any())),
            Err(Error::Registration(_))
        ));
    }

    #[test]
    fn invalid_schema_is_schema_error() {
        // Specs hold compiled schemas, so a bad document fails before
        // registration can be attempted.
        assert!(matches!(EntitySchema::new(json!("not-a-schema")), Err(Error::Schema(_))));
    }

    #[test]
    fn repeatable_flag_rejected() {
        let mut spec = noop("r", EntitySchema::any());
        spec.repeatable = true;
        assert!(matches!(Registry::new().with(spec), Err(Error::Registration(_))));
    }

    #[test]
    fn empty_argv_rejected() {
        assert!(ExternalCommand::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn dispatch_by_schema_and_run_record() {
        let r = Registry::new().with(noop("java-detector", java_schema())).unwrap();
        let fresh = entity(json!({"$TYPE": "microservice", "$path": "svc", "$extractors": []}));
        assert_eq!(r.matching_extractors(&fresh).len(), 1);
        let ran = entity(json!({"$TYPE": "microservice", "$path": "svc", "$extractors": ["java-detector"]}));
        assert!(r.matching_extractors(&ran).is_empty());
        let no_path = entity(json!({"$TYPE": "microservice", "$extractors": []}));
        assert!(r.matching_extractors(&no_path).is_empty());
    }

    #[test]
    fn dispatch_preserves_registration_order() {
        let r = ["c", "a", "b"]
            .into_iter()
            .try_fold(Registry::new(), |r, id| r.with(noop(id, EntitySchema::any())))
            .unwrap();
        let e = ModelEntity::new("x", Map::new(), &IdGenerator::sequential()).unwrap();
        let ids: Vec<_> = r.matching_extractors(&e).iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }
}
