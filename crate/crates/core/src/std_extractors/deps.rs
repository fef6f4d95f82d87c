//! Reads declared dependencies from package manifests at a service root.

use std::path::Path;

use serde_json::{json, Value};

use super::java::microservice_with_path;
use crate::error::{Error, Result};
use crate::extractor::{ExtractorSpec, RunContext};
use crate::model::ModelEntity;

pub const ID: &str = "dependency-manifest";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dependency {
    pub name: String,
    pub version: Option<String>,
}

impl Dependency {
    fn to_value(&self) -> Value {
        match &self.version {
            Some(v) => json!({"name": self.name, "version": v}),
            None => json!({"name": self.name}),
        }
    }
}

type ManifestParser = fn(&str) -> Result<Vec<Dependency>, String>;

pub fn spec() -> ExtractorSpec {
    ExtractorSpec::in_process(ID, microservice_with_path(), run)
}

fn run(mut entity: ModelEntity, ctx: &RunContext<'_>) -> Result<ModelEntity> {
    let Some(path) = ctx.entity_path(&entity) else {
        return Ok(entity);
    };
    let dir = ctx.resolve(path);
    let mut deps: Vec<Dependency> = Vec::new();
    let readers: [(&str, ManifestParser); 3] = [
        ("package.json", parse_package_json),
        ("pom.xml", parse_pom),
        ("requirements.txt", parse_requirements),
    ];
    for (name, parse) in readers {
        let file = dir.join(name);
        if !file.is_file() {
            continue;
        }
        let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let found = parse(&text).map_err(|message| Error::Parse {
            origin: display_rel(path, name),
            message,
        })?;
        for d in found {
            if !deps.contains(&d) {
                deps.push(d);
            }
        }
    }
    for d in &deps {
        entity.push_to("dependencies", d.to_value())?;
    }
    Ok(entity)
}

fn display_rel(base: &str, name: &str) -> String {
    Path::new(base).join(name).to_string_lossy().into_owned()
}

pub fn parse_package_json(text: &str) -> Result<Vec<Dependency>, String> {
    let doc: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let Some(deps) = doc.get("dependencies") else {
        return Ok(Vec::new());
    };
    let deps = deps.as_object().ok_or("`dependencies` must be an object")?;
    Ok(deps
        .iter()
        .map(|(name, v)| Dependency {
            name: name.clone(),
            version: Some(v.as_str().map_or_else(|| v.to_string(), str::to_owned)),
        })
        .collect())
}

/// `<dependency>` elements outside `<dependencyManagement>`, named
/// `groupId:artifactId`.
pub fn parse_pom(text: &str) -> Result<Vec<Dependency>, String> {
    let doc = roxmltree::Document::parse(text).map_err(|e| e.to_string())?;
    let child_text = |node: roxmltree::Node, tag: &str| {
        node.children()
            .find(|c| c.tag_name().name() == tag)
            .and_then(|c| c.text())
            .map(|t| t.trim().to_owned())
    };
    let mut out = Vec::new();
    for node in doc.descendants().filter(|n| n.tag_name().name() == "dependency") {
        if node.ancestors().any(|a| a.tag_name().name() == "dependencyManagement") {
            continue;
        }
        let (Some(group), Some(artifact)) = (child_text(node, "groupId"), child_text(node, "artifactId")) else {
            return Err("dependency without groupId or artifactId".into());
        };
        out.push(Dependency {
            name: format!("{group}:{artifact}"),
            version: child_text(node, "version"),
        });
    }
    Ok(out)
}

const OPERATORS: &[&str] = &["===", "==", "~=", "!=", ">=", "<=", ">", "<"];

/// Pinned requirements (`==`) record the bare version; any other specifier
/// is kept verbatim. Options, comments and blank lines are skipped.
pub fn parse_requirements(text: &str) -> Result<Vec<Dependency>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(" #").next().unwrap_or_default().trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('-') {
            continue;
        }
        let line = line.split(';').next().unwrap_or_default().trim();
        let split = OPERATORS
            .iter()
            .filter_map(|op| line.find(op).map(|at| (at, *op)))
            .min_by_key(|(at, op)| (*at, std::cmp::Reverse(op.len())));
        let (name, version) = match split {
            Some((at, "==")) => (&line[..at], Some(line[at + 2..].trim().to_owned())),
            Some((at, _)) => (&line[..at], Some(line[at..].trim().to_owned())),
            None => (line, None),
        };
        let name = name.split('[').next().unwrap_or_default().trim();
        let valid = !name.is_empty()
            && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
        if !valid {
            return Err(format!("line {}: cannot parse requirement {raw:?}", i + 1));
        }
        out.push(Dependency {
            name: name.to_owned(),
            version,
        });
    }
    Ok(out)
}
