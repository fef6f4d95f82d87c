//! Command-line workflows. Diagnostics go to stderr; stdout carries only
//! machine-readable JSON.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{ExternalConfig, InitialEntity, ReconstructionConfig, DEFAULT_TYPE};

use crate::aggregate::{aggregate_models, MergeOptions};
use crate::engine::Engine;
use crate::error::Error;
use crate::link::{record_resolutions, LinkPolicy, OnFailure};
use crate::model::{check_invariants, read_model_file, write_model_file, EntitySchema, IdGenerator, ModelFile, PATH_KEY};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFLICT: i32 = 2;
pub const EXIT_EXTRACTOR: i32 = 3;
pub const EXIT_POLICY: i32 = 4;
pub const EXIT_CONFIG: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "archreco", version, about = "Static microservice architecture reconstruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reconstruct one repository into a model file.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        repo: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sequential identifiers and byte-stable output.
        #[arg(long)]
        deterministic: bool,
    },
    /// Merge model files into one.
    Aggregate {
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Only merge objects sharing an equal primitive field.
        #[arg(long)]
        strict_merge: bool,
    },
    /// Resolve links and print a report.
    Resolve {
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        strict_ambiguous: bool,
        #[arg(long)]
        strict_unresolved: bool,
        /// Discard recorded resolutions first.
        #[arg(long)]
        re_resolve: bool,
    },
    /// Check file structure and, optionally, a schema.
    Validate {
        model: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
    },
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Reconstruct {
            config,
            repo,
            out,
            deterministic,
        } => cmd_reconstruct(&config, &repo, &out, deterministic),
        Command::Aggregate {
            models,
            out,
            strict_merge,
        } => cmd_aggregate(&models, &out, strict_merge),
        Command::Resolve {
            model,
            out,
            strict_ambiguous,
            strict_unresolved,
            re_resolve,
        } => {
            let on = |strict| if strict { OnFailure::Error } else { OnFailure::Record };
            let policy = LinkPolicy {
                ambiguous: on(strict_ambiguous),
                unresolved: on(strict_unresolved),
                re_resolve,
            };
            cmd_resolve(&model, &out, &policy)
        }
        Command::Validate { model, schema } => cmd_validate(&model, schema.as_deref()),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Conflict(_) => EXIT_CONFLICT,
        Error::Config(_) | Error::Registration(_) => EXIT_CONFIG,
        e if e.is_engine_error() => EXIT_EXTRACTOR,
        Error::LinkResolution { .. } => EXIT_POLICY,
        _ => EXIT_FAILURE,
    }
}

fn fail(e: Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(&e)
}

pub fn cmd_reconstruct(config_path: &Path, repo: &Path, out: &Path, deterministic: bool) -> i32 {
    let config = match ReconstructionConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let registry = match config.registry() {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let repo = match repo.canonicalize() {
        Ok(p) if p.is_dir() => p,
        _ => return fail(Error::Config(format!("{} is not a readable directory", repo.display()))),
    };
    let ids = if deterministic || config.deterministic_ids {
        IdGenerator::sequential()
    } else {
        IdGenerator::random()
    };
    let mut fields = config.initial_entity.fields.clone();
    fields.entry(PATH_KEY).or_insert_with(|| ".".into());

    let engine = Engine::new(registry, ids);
    let root = match engine.create_model_entity(&config.initial_entity.type_tag, fields, &repo) {
        Ok(root) => root,
        Err(e) => return fail(e),
    };
    if let Err(e) = write_model_file(&ModelFile::new(root), out) {
        return fail(e);
    }
    let s = engine.summary();
    eprintln!(
        "reconstructed {}: {} entities created, {} extractor runs, {} passes",
        repo.display(),
        s.entities_created,
        s.extractors_run,
        s.passes
    );
    EXIT_OK
}

pub fn cmd_aggregate(models: &[PathBuf], out: &Path, strict_merge: bool) -> i32 {
    let mut inputs = Vec::with_capacity(models.len());
    for path in models {
        match read_model_file(path) {
            Ok(m) => inputs.push((path.display().to_string(), m)),
            Err(e) => return fail(e),
        }
    }
    let opts = MergeOptions { strict: strict_merge };
    let merged = match aggregate_models(&inputs, opts) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    match write_model_file(&merged, out) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(e),
    }
}

/// Writes the resolved model and prints the report even when the policy
/// is violated, so a failing CI job still leaves its evidence behind.
pub fn cmd_resolve(model_path: &Path, out: &Path, policy: &LinkPolicy) -> i32 {
    let model = match read_model_file(model_path) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let (resolved, report) = match record_resolutions(&model, policy.re_resolve) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Err(e) = write_model_file(&resolved, out) {
        return fail(e);
    }
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    // A closed stdout (e.g. piped into `head`) is not a resolution failure.
    let _ = writeln!(std::io::stdout(), "{text}");
    eprintln!(
        "links: {} resolved, {} ambiguous, {} unresolved",
        report.resolved, report.ambiguous, report.unresolved
    );
    match report.enforce(policy) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(e),
    }
}

pub fn cmd_validate(model_path: &Path, schema_path: Option<&Path>) -> i32 {
    let problems = match validation_problems(model_path, schema_path) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    if problems.is_empty() {
        eprintln!("{}: valid", model_path.display());
        EXIT_OK
    } else {
        for p in &problems {
            eprintln!("{}: {p}", model_path.display());
        }
        EXIT_FAILURE
    }
}

/// Every structural, bookkeeping and schema problem in a model file.
pub fn validation_problems(model_path: &Path, schema_path: Option<&Path>) -> crate::Result<Vec<String>> {
    let text = std::fs::read_to_string(model_path).map_err(|e| Error::io(model_path, e))?;
    let origin = model_path.display().to_string();
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        origin: origin.clone(),
        message: e.to_string(),
    })?;
    let mut problems: Vec<String> = check_invariants(&value)
        .into_iter()
        .map(|v| format!("{}: {}", v.pointer, v.message))
        .collect();
    let model = match ModelFile::from_value(value, &origin) {
        Ok(m) => m,
        Err(e) => {
            problems.push(e.to_string());
            return Ok(problems);
        }
    };
    if model.root.type_tag().is_none() {
        problems.push("/root: entity is missing $TYPE".into());
    }
    if let Some(schema_path) = schema_path {
        let text = std::fs::read_to_string(schema_path).map_err(|e| Error::io(schema_path, e))?;
        let doc = serde_json::from_str(&text).map_err(|e| Error::Parse {
            origin: schema_path.display().to_string(),
            message: e.to_string(),
        })?;
        let schema = EntitySchema::new(doc)?;
        problems.extend(schema.errors(model.root.as_value()).into_iter().map(|e| format!("schema: {e}")));
    }
    Ok(problems)
}
