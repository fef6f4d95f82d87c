//! Turns hard-coded HTTP URLs in source string literals into links to the
//! microservice serving them.

use std::collections::HashSet;

use serde_json::{json, Map, Value};

use super::java::microservice_with_path;
use crate::error::Result;
use crate::extractor::{ExtractorSpec, RunContext};
use crate::link::make_link;
use crate::model::ModelEntity;
use crate::scan::{find_urls, patterns::string_literal_regex, UrlParts};

pub const ID: &str = "http-call-links";

pub const SOURCE_GLOB: &str =
    "**/*.{java,kt,kts,scala,groovy,js,mjs,cjs,ts,tsx,jsx,py,go,rb,php,cs,rs,swift,dart}";

/// Where link targets are looked up in the final model.
pub const SERVICES_POINTER: &str = "/microservices";

pub fn spec() -> ExtractorSpec {
    ExtractorSpec::in_process(ID, microservice_with_path(), run)
}

fn run(mut entity: ModelEntity, ctx: &RunContext<'_>) -> Result<ModelEntity> {
    let Some(path) = ctx.entity_path(&entity) else {
        return Ok(entity);
    };
    if !ctx.resolve(path).is_dir() {
        return Ok(entity);
    }
    let matches = ctx.scan_at(path).search_regex(SOURCE_GLOB, string_literal_regex())?;
    let mut seen = HashSet::new();
    for m in matches {
        let Some(body) = m.captures.iter().flatten().next() else {
            continue;
        };
        for url in find_urls(body) {
            if seen.insert(url.url.clone()) {
                entity.push_to("calls", make_link(target_schema(&url), SERVICES_POINTER)?)?;
            }
        }
    }
    Ok(entity)
}

/// A microservice whose domain is the URL host and which, when the URL
/// says so, exposes the port and serves the path.
pub fn target_schema(url: &UrlParts) -> Value {
    let mut properties = Map::new();
    let mut required = vec![json!("domain")];
    properties.insert("$TYPE".into(), json!({"const": "microservice"}));
    properties.insert("domain".into(), json!({"const": url.host}));
    if let Some(port) = url.port {
        properties.insert("ports".into(), json!({"type": "array", "contains": {"const": port}}));
        required.push(json!("ports"));
    }
    if let Some(path) = url.path.as_deref().filter(|p| !p.is_empty() && *p != "/") {
        properties.insert("endpoints".into(), json!({"type": "array", "contains": {"const": path}}));
        required.push(json!("endpoints"));
    }
    json!({"type": "object", "properties": properties, "required": required})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_requirements_follow_url() {
        let full = &find_urls("https://test-service:123/api/456")[0];
        let s = target_schema(full);
        assert_eq!(s["required"], json!(["domain", "ports", "endpoints"]));
        assert_eq!(s["properties"]["ports"]["contains"]["const"], 123);

        let bare = &find_urls("http://billing")[0];
        let s = target_schema(bare);
        assert_eq!(s["required"], json!(["domain"]));
        assert!(s["properties"].get("ports").is_none());
    }
}
