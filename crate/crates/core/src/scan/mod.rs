//! Repository scanning helpers available to extractors: path discovery by
//! glob, content search by regular expression, and prebuilt patterns.
//!
//! Regular expressions use the `regex` crate dialect (no backreferences or
//! lookaround), so scans run in time linear in the file size.

mod glob;
pub mod patterns;

use std::fs;
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::par::{map_ordered, ExecMode};

pub use glob::Glob;
pub use patterns::{find_urls, literal_body, string_literal_pattern, url_pattern, UrlParts};

/// Files larger than this are skipped.
pub const MAX_FILE_BYTES: u64 = 10 * 1024 * 1024;
/// A NUL byte within this prefix marks a file as binary.
pub const BINARY_SNIFF_BYTES: usize = 8 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentMatch {
    /// Path relative to the scanned root, `/`-separated.
    pub path: String,
    /// 1-based.
    pub line: usize,
    /// 1-based byte column within the line.
    pub column: usize,
    pub matched_text: String,
    /// Capture groups 1..n; `None` where a group did not participate.
    pub captures: Vec<Option<String>>,
}

/// Scan operations bound to a directory.
#[derive(Debug, Clone)]
pub struct Scanner {
    root: PathBuf,
    mode: ExecMode,
}

impl Scanner {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            mode: ExecMode::default(),
        }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// All paths under the root matching `pattern`, sorted.
    pub fn get_paths(&self, pattern: &str) -> Result<Vec<String>> {
        Ok(self.walk(&Glob::new(pattern)?)?.into_iter().map(|(p, _)| p).collect())
    }

    /// Files matching `pattern` whose content matches `regex`.
    pub fn find_files_containing(&self, pattern: &str, regex: &str) -> Result<Vec<String>> {
        let re = compile(regex)?;
        let files = self.files(pattern)?;
        let hits = map_ordered(self.mode, &files, |rel| {
            self.read_text(rel).is_some_and(|text| re.is_match(&text))
        });
        Ok(files.into_iter().zip(hits).filter_map(|(f, hit)| hit.then_some(f)).collect())
    }

    /// Every non-empty match of `regex` in files matching `pattern`, ordered
    /// by (path, line, column).
    pub fn search_content(&self, pattern: &str, regex: &str) -> Result<Vec<ContentMatch>> {
        self.search_regex(pattern, &compile(regex)?)
    }

    pub fn search_regex(&self, pattern: &str, re: &Regex) -> Result<Vec<ContentMatch>> {
        let files = self.files(pattern)?;
        let per_file = map_ordered(self.mode, &files, |rel| match self.read_text(rel) {
            Some(text) => matches_in(rel, &text, re),
            None => Vec::new(),
        });
        Ok(per_file.into_iter().flatten().collect())
    }

    fn files(&self, pattern: &str) -> Result<Vec<String>> {
        let glob = Glob::new(pattern)?;
        Ok(self
            .walk(&glob)?
            .into_iter()
            .filter_map(|(p, is_file)| is_file.then_some(p))
            .collect())
    }

    /// Returns matching (relative path, is regular file) pairs, sorted.
    fn walk(&self, glob: &Glob) -> Result<Vec<(String, bool)>> {
        let root = fs::canonicalize(&self.root).map_err(|e| Error::io(&self.root, e))?;
        let admits_hidden = glob.admits_hidden();
        let mut walker = WalkDir::new(&root).min_depth(1).follow_links(false);
        if let Some(depth) = glob.max_depth() {
            walker = walker.max_depth(depth);
        }
        let mut out = Vec::new();
        let entries = walker.into_iter().filter_entry(|e| {
            admits_hidden || e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.')
        });
        for entry in entries {
            let entry = match entry {
                Ok(e) => e,
                Err(e) => {
                    log::warn!("skipping unreadable path: {e}");
                    continue;
                }
            };
            let rel = relative(&root, entry.path());
            let (is_dir, is_file) = if entry.path_is_symlink() {
                // Symlinks count only when they resolve inside the root.
                match fs::canonicalize(entry.path()) {
                    Ok(target) if target.starts_with(&root) => (target.is_dir(), target.is_file()),
                    _ => continue,
                }
            } else {
                (entry.file_type().is_dir(), entry.file_type().is_file())
            };
            if glob.matches_path(&rel, is_dir) {
                out.push((rel, is_file));
            }
        }
        out.sort();
        Ok(out)
    }

    /// File content as text, or `None` for oversized, binary or unreadable
    /// files (logged).
    fn read_text(&self, rel: &str) -> Option<String> {
        let path = self.root.join(rel);
        match fs::metadata(&path) {
            Ok(meta) if meta.len() > MAX_FILE_BYTES => {
                log::warn!("skipping {rel}: larger than {MAX_FILE_BYTES} bytes");
                return None;
            }
            Err(e) => {
                log::warn!("skipping {rel}: {e}");
                return None;
            }
            Ok(_) => {}
        }
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                log::warn!("skipping {rel}: {e}");
                return None;
            }
        };
        if bytes[..bytes.len().min(BINARY_SNIFF_BYTES)].contains(&0) {
            log::debug!("skipping binary file {rel}");
            return None;
        }
        Some(match String::from_utf8(bytes) {
            Ok(s) => s,
            Err(e) => String::from_utf8_lossy(e.as_bytes()).into_owned(),
        })
    }
}

pub fn get_paths(root: impl AsRef<Path>, pattern: &str) -> Result<Vec<String>> {
    Scanner::new(root.as_ref()).get_paths(pattern)
}

pub fn find_files_containing(root: impl AsRef<Path>, pattern: &str, regex: &str) -> Result<Vec<String>> {
    Scanner::new(root.as_ref()).find_files_containing(pattern, regex)
}

pub fn search_content(root: impl AsRef<Path>, pattern: &str, regex: &str) -> Result<Vec<ContentMatch>> {
    Scanner::new(root.as_ref()).search_content(pattern, regex)
}

fn compile(regex: &str) -> Result<Regex> {
    Regex::new(regex).map_err(|e| Error::pattern(regex, e.to_string()))
}

fn relative(root: &Path, path: &Path) -> String {
    path.strip_prefix(root)
        .unwrap_or(path)
        .components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn matches_in(rel: &str, text: &str, re: &Regex) -> Vec<ContentMatch> {
    let line_starts: Vec<usize> = std::iter::once(0)
        .chain(text.match_indices('\n').map(|(i, _)| i + 1))
        .collect();
    re.captures_iter(text)
        .filter_map(|caps| {
            let whole = caps.get(0)?;
            if whole.is_empty() {
                return None;
            }
            let line = line_starts.partition_point(|&s| s <= whole.start());
            Some(ContentMatch {
                path: rel.to_string(),
                line,
                column: whole.start() - line_starts[line - 1] + 1,
                matched_text: whole.as_str().to_string(),
                captures: caps
                    .iter()
                    .skip(1)
                    .map(|g| g.map(|m| m.as_str().to_string()))
                    .collect(),
            })
        })
        .collect()
}
