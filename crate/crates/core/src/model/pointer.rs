//! RFC 6901 JSON Pointer parsing and evaluation.
//!
//! `serde_json::Value::pointer` silently treats malformed pointers as
//! "not found"; callers here need the two cases kept apart, so parsing is
//! explicit.

use serde_json::Value;

use crate::error::{Error, Result};

/// A parsed JSON Pointer: the sequence of unescaped reference tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JsonPointer {
    tokens: Vec<String>,
}

impl JsonPointer {
    pub fn parse(pointer: &str) -> Result<Self> {
        if pointer.is_empty() {
            return Ok(Self::root());
        }
        let Some(rest) = pointer.strip_prefix('/') else {
            return Err(syntax(pointer, "must be empty or start with '/'"));
        };
        let tokens = rest
            .split('/')
            .map(|raw| unescape(raw).ok_or_else(|| syntax(pointer, "'~' must be followed by '0' or '1'")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { tokens })
    }

    pub fn root() -> Self {
        Self { tokens: Vec::new() }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn push(&mut self, token: impl Into<String>) {
        self.tokens.push(token.into());
    }

    pub fn pop(&mut self) -> Option<String> {
        self.tokens.pop()
    }

    pub fn child(&self, token: impl Into<String>) -> Self {
        let mut next = self.clone();
        next.push(token);
        next
    }

    pub fn resolve<'v>(&self, root: &'v Value) -> Option<&'v Value> {
        self.tokens.iter().try_fold(root, |node, token| match node {
            Value::Object(map) => map.get(token),
            Value::Array(items) => array_index(token).and_then(|i| items.get(i)),
            _ => None,
        })
    }

    pub fn resolve_mut<'v>(&self, root: &'v mut Value) -> Option<&'v mut Value> {
        self.tokens.iter().try_fold(root, |node, token| match node {
            Value::Object(map) => map.get_mut(token),
            Value::Array(items) => array_index(token).and_then(move |i| items.get_mut(i)),
            _ => None,
        })
    }
}

impl std::fmt::Display for JsonPointer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for token in &self.tokens {
            write!(f, "/{}", escape(token))?;
        }
        Ok(())
    }
}

impl std::str::FromStr for JsonPointer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Evaluates `pointer` against `root`. `Ok(None)` means the pointer is well
/// formed but names no value.
pub fn resolve_pointer<'v>(root: &'v Value, pointer: &str) -> Result<Option<&'v Value>> {
    Ok(JsonPointer::parse(pointer)?.resolve(root))
}

pub fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn unescape(raw: &str) -> Option<String> {
    if !raw.contains('~') {
        return Some(raw.to_string());
    }
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c == '~' {
            match chars.next() {
                Some('0') => out.push('~'),
                Some('1') => out.push('/'),
                _ => return None,
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

fn array_index(token: &str) -> Option<usize> {
    let leading_zero = token.len() > 1 && token.starts_with('0');
    if token.is_empty() || leading_zero || !token.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    token.parse().ok()
}

fn syntax(pointer: &str, reason: &str) -> Error {
    Error::PointerSyntax {
        pointer: pointer.to_string(),
        reason: reason.to_string(),
    }
}
