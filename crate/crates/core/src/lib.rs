//! Static reconstruction of microservice architectures.
//!
//! A reconstruction starts from one top-level entity and repeatedly runs
//! every registered extractor whose input schema accepts it. Extractor
//! output is folded back with a conflict-checked union, new sub-entities
//! are processed recursively, and the run stops once no extractor has
//! anything left to do. The resulting models can be aggregated and their
//! links resolved afterwards.

pub mod aggregate;
pub mod cli;
pub mod engine;
pub mod error;
pub mod extractor;
pub mod link;
pub mod model;
pub mod par;
pub mod scan;
pub mod std_extractors;

pub use aggregate::{aggregate, aggregate_models, compatible, merge_arrays, MergeOptions};
pub use engine::{Engine, MAX_DEPTH};
pub use error::{ConflictError, Error, Result};
pub use extractor::{ExternalCommand, ExtractorSpec, Registry, RunContext};
pub use link::{make_link, resolve_links, LinkPolicy, ResolutionReport};
pub use model::{EntitySchema, IdGenerator, ModelEntity, ModelFile};
pub use par::ExecMode;
