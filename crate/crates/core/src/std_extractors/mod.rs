//! Built-in extractors.

pub mod compose;
pub mod deps;
pub mod http_calls;
pub mod java;

use crate::error::{Error, Result};
use crate::extractor::{ExtractorSpec, Registry};

/// Ids of every built-in extractor, in registration order.
pub const BUILTIN_IDS: &[&str] = &[compose::ID, java::ID, deps::ID, http_calls::ID];

pub fn builtin(id: &str) -> Option<ExtractorSpec> {
    match id {
        compose::ID => Some(compose::spec()),
        java::ID => Some(java::spec()),
        deps::ID => Some(deps::spec()),
        http_calls::ID => Some(http_calls::spec()),
        _ => None,
    }
}

/// A registry holding the named built-ins.
pub fn registry_of<S: AsRef<str>>(ids: &[S]) -> Result<Registry> {
    let mut registry = Registry::new();
    for id in ids {
        let id = id.as_ref();
        let spec = builtin(id).ok_or_else(|| Error::Config(format!("unknown built-in extractor {id:?}")))?;
        registry.register_extractor(spec)?;
    }
    Ok(registry)
}

pub fn standard_registry() -> Registry {
    registry_of(BUILTIN_IDS).expect("built-ins register cleanly")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_register() {
        assert_eq!(standard_registry().ids(), BUILTIN_IDS);
        assert!(registry_of(&["nope"]).is_err());
        assert!(registry_of(&[java::ID, java::ID]).is_err());
    }
}
