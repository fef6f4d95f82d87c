//! Model representation: entities, identities, schemas, pointers and files.

mod entity;
mod file;
mod ids;
pub mod pointer;
mod schema;

pub use entity::{
    check_invariants, is_bookkeeping_key, is_entity, is_extractor_data_key, is_internal_key,
    is_link, InvariantViolation, ModelEntity, EXTRACTORS_KEY, LINK_TYPE, PATH_KEY, TYPE_KEY,
    UUIDS_KEY,
};
pub(crate) use entity::kind;
pub use file::{read_model_file, to_canonical_json, write_model_file, ModelFile, FORMAT_VERSION};
pub use ids::IdGenerator;
pub use pointer::{resolve_pointer, JsonPointer};
pub use schema::EntitySchema;

use serde_json::{Map, Value};

use crate::error::Result;

/// Creates a bare entity: fresh identity, no extractors run.
pub fn new_entity(type_tag: &str, initial_fields: Map<String, Value>, ids: &IdGenerator) -> Result<ModelEntity> {
    ModelEntity::new(type_tag, initial_fields, ids)
}

/// Validates `entity` against `schema`.
pub fn validate(entity: &ModelEntity, schema: &EntitySchema) -> bool {
    schema.is_valid(entity.as_value())
}
