//! Prebuilt expressions for common lexical shapes.

use std::sync::OnceLock;

use regex::{Captures, Regex};

const LABEL: &str = r"[A-Za-z0-9](?:[A-Za-z0-9_-]*[A-Za-z0-9])?";

/// `http`/`https` URLs. Groups, in order: `scheme`, `host`, `port` (optional),
/// `path` (optional; stops before a query, fragment, quote or whitespace).
pub fn url_pattern() -> &'static str {
    static PATTERN: OnceLock<String> = OnceLock::new();
    PATTERN.get_or_init(|| {
        format!(
            r#"\b(?P<scheme>(?i:https?))://(?P<host>{LABEL}(?:\.{LABEL})*)(?::(?P<port>[0-9]{{1,5}}))?(?P<path>/[^\s"'`<>\\?#]*)?"#
        )
    })
}

/// Single-line double- or single-quoted literals with backslash escapes.
/// The unquoted body is in group `dq` or `sq`; see [`literal_body`].
pub fn string_literal_pattern() -> &'static str {
    r#""(?P<dq>(?:[^"\\\n]|\\.)*)"|'(?P<sq>(?:[^'\\\n]|\\.)*)'"#
}

pub fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(url_pattern()).expect("url pattern compiles"))
}

pub fn string_literal_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(string_literal_pattern()).expect("literal pattern compiles"))
}

/// The body of a literal matched by [`string_literal_pattern`].
pub fn literal_body<'h>(caps: &Captures<'h>) -> Option<&'h str> {
    caps.name("dq").or_else(|| caps.name("sq")).map(|m| m.as_str())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrlParts {
    pub url: String,
    pub scheme: String,
    pub host: String,
    pub port: Option<u16>,
    pub path: Option<String>,
}

/// Every URL in `text`, in order of appearance. Ports above 65535 are
/// not URLs and are skipped.
pub fn find_urls(text: &str) -> Vec<UrlParts> {
    url_regex()
        .captures_iter(text)
        .filter_map(|caps| {
            let port = match caps.name("port") {
                Some(p) => Some(p.as_str().parse::<u16>().ok()?),
                None => None,
            };
            Some(UrlParts {
                url: caps[0].to_string(),
                scheme: caps["scheme"].to_ascii_lowercase(),
                host: caps["host"].to_string(),
                port,
                path: caps.name("path").map(|m| m.as_str().to_string()),
            })
        })
        .collect()
}
