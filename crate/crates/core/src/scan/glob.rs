//! Bash-style glob patterns over repository-relative paths.
//!
//! Supported: `*`, `?`, `[...]` classes (`!`/`^` negation, ranges), `{a,b}`
//! alternation (nestable), `**` as a whole path segment spanning any number
//! of directories, and `\` escapes. A trailing `/` restricts matches to
//! directories. Names starting with `.` only match a segment that itself
//! starts with a literal `.`; `**` never descends into them.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Literal(char),
    AnyRun,
    AnyOne,
    Class { negated: bool, ranges: Vec<(char, char)> },
}

#[derive(Debug, Clone, PartialEq)]
enum Segment {
    AnyDepth,
    Name(Vec<Token>),
}

impl Segment {
    fn admits_hidden(&self) -> bool {
        matches!(self, Segment::Name(tokens) if tokens.first() == Some(&Token::Literal('.')))
    }
}

#[derive(Debug, Clone)]
pub struct Glob {
    source: String,
    alternatives: Vec<Vec<Segment>>,
    dir_only: bool,
}

impl Glob {
    pub fn new(pattern: &str) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::pattern(pattern, "empty pattern"));
        }
        if pattern.starts_with('/') {
            return Err(Error::pattern(pattern, "pattern must be relative to the root"));
        }
        let (body, dir_only) = match pattern.strip_suffix('/') {
            Some(b) => (b, true),
            None => (pattern, false),
        };
        let alternatives = expand_braces(body)
            .map_err(|reason| Error::pattern(pattern, reason))?
            .iter()
            .map(|alt| parse_segments(alt))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|reason| Error::pattern(pattern, reason))?;
        Ok(Self {
            source: pattern.to_string(),
            alternatives,
            dir_only,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    /// Whether any alternative can match a hidden path component.
    pub(crate) fn admits_hidden(&self) -> bool {
        self.alternatives.iter().flatten().any(Segment::admits_hidden)
    }

    /// Deepest path (in components) any alternative can match, or `None`
    /// when `**` makes it unbounded.
    pub(crate) fn max_depth(&self) -> Option<usize> {
        self.alternatives
            .iter()
            .map(|segs| (!segs.contains(&Segment::AnyDepth)).then_some(segs.len()))
            .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }

    pub fn is_match(&self, path: &str) -> bool {
        self.matches_path(path, true)
    }

    /// Matches a `/`-separated relative path. `is_dir` is consulted only for
    /// patterns with a trailing `/`.
    pub fn matches_path(&self, path: &str, is_dir: bool) -> bool {
        if self.dir_only && !is_dir {
            return false;
        }
        let components: Vec<Vec<char>> = path
            .split('/')
            .filter(|c| !c.is_empty())
            .map(|c| c.chars().collect())
            .collect();
        self.alternatives
            .iter()
            .any(|segs| match_segments(segs, &components))
    }
}

fn match_segments(segs: &[Segment], comps: &[Vec<char>]) -> bool {
    let Some((seg, rest)) = segs.split_first() else {
        return comps.is_empty();
    };
    match seg {
        Segment::AnyDepth => {
            for skip in 0..=comps.len() {
                if skip > 0 && is_hidden(&comps[skip - 1]) {
                    return false;
                }
                if match_segments(rest, &comps[skip..]) {
                    return true;
                }
            }
            false
        }
        Segment::Name(tokens) => match comps.split_first() {
            Some((first, tail)) => {
                (!is_hidden(first) || seg.admits_hidden())
                    && match_name(tokens, first)
                    && match_segments(rest, tail)
            }
            None => false,
        },
    }
}

fn is_hidden(component: &[char]) -> bool {
    component.first() == Some(&'.')
}

fn match_name(tokens: &[Token], name: &[char]) -> bool {
    // Iterative wildcard matching with single-star backtracking.
    let (mut t, mut n) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while n < name.len() {
        match tokens.get(t) {
            Some(Token::AnyRun) => {
                star = Some((t, n));
                t += 1;
                continue;
            }
            Some(tok) if token_matches(tok, name[n]) => {
                t += 1;
                n += 1;
                continue;
            }
            _ => {}
        }
        match star {
            Some((st, sn)) => {
                t = st + 1;
                n = sn + 1;
                star = Some((st, sn + 1));
            }
            None => return false,
        }
    }
    tokens[t..].iter().all(|tok| *tok == Token::AnyRun)
}

fn token_matches(token: &Token, c: char) -> bool {
    match token {
        Token::Literal(l) => *l == c,
        Token::AnyOne => true,
        Token::AnyRun => true,
        Token::Class { negated, ranges } => {
            ranges.iter().any(|&(lo, hi)| lo <= c && c <= hi) != *negated
        }
    }
}

fn parse_segments(pattern: &str) -> std::result::Result<Vec<Segment>, String> {
    let mut segments = Vec::new();
    for raw in split_unescaped(pattern, '/') {
        if raw.is_empty() {
            return Err("empty path segment".into());
        }
        if raw == "**" {
            if segments.last() != Some(&Segment::AnyDepth) {
                segments.push(Segment::AnyDepth);
            }
            continue;
        }
        segments.push(Segment::Name(parse_tokens(&raw)?));
    }
    Ok(segments)
}

fn split_unescaped(pattern: &str, sep: char) -> Vec<String> {
    let mut parts = vec![String::new()];
    let mut chars = pattern.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            let part = parts.last_mut().unwrap();
            part.push(c);
            if let Some(next) = chars.next() {
                part.push(next);
            }
        } else if c == sep {
            parts.push(String::new());
        } else {
            parts.last_mut().unwrap().push(c);
        }
    }
    parts
}

fn parse_tokens(segment: &str) -> std::result::Result<Vec<Token>, String> {
    let chars: Vec<char> = segment.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '\\' => {
                let c = *chars.get(i + 1).ok_or("dangling escape")?;
                tokens.push(Token::Literal(c));
                i += 2;
            }
            '*' => {
                if tokens.last() != Some(&Token::AnyRun) {
                    tokens.push(Token::AnyRun);
                }
                i += 1;
            }
            '?' => {
                tokens.push(Token::AnyOne);
                i += 1;
            }
            '[' => {
                let (token, next) = parse_class(&chars, i)?;
                tokens.push(token);
                i = next;
            }
            c => {
                tokens.push(Token::Literal(c));
                i += 1;
            }
        }
    }
    Ok(tokens)
}

/// Parses a class starting at `chars[open] == '['`; returns the token and
/// the index after the closing `]`.
fn parse_class(chars: &[char], open: usize) -> std::result::Result<(Token, usize), String> {
    let mut i = open + 1;
    let negated = matches!(chars.get(i), Some('!') | Some('^'));
    if negated {
        i += 1;
    }
    let mut ranges = Vec::new();
    let mut first = true;
    loop {
        let c = match chars.get(i) {
            None => return Err("unclosed character class".into()),
            Some(']') if !first => return Ok((Token::Class { negated, ranges }, i + 1)),
            Some('\\') => {
                i += 1;
                *chars.get(i).ok_or("dangling escape")?
            }
            Some(&c) => c,
        };
        first = false;
        if chars.get(i + 1) == Some(&'-') && chars.get(i + 2).is_some_and(|&h| h != ']') {
            let hi = chars[i + 2];
            if hi < c {
                return Err(format!("invalid range {c}-{hi}"));
            }
            ranges.push((c, hi));
            i += 3;
        } else {
            ranges.push((c, c));
            i += 1;
        }
    }
}

/// Expands `{a,b}` alternations (nested, left to right). Braces without a
/// top-level comma are kept literally, as bash does.
fn expand_braces(pattern: &str) -> std::result::Result<Vec<String>, String> {
    let chars: Vec<char> = pattern.chars().collect();
    let Some(open) = find_open_brace(&chars)? else {
        return Ok(vec![pattern.to_string()]);
    };
    let close = find_matching_brace(&chars, open).ok_or("unclosed '{'")?;
    let inner: String = chars[open + 1..close].iter().collect();
    let prefix: String = chars[..open].iter().collect();
    let suffix: String = chars[close + 1..].iter().collect();
    let options = split_top_level_commas(&inner);
    if options.len() < 2 {
        // `{x}` is literal; escape the braces and keep expanding the rest.
        let literal = format!("{prefix}\\{{{inner}\\}}{suffix}");
        return expand_braces(&literal);
    }
    let mut out = Vec::new();
    for option in options {
        out.extend(expand_braces(&format!("{prefix}{option}{suffix}"))?);
    }
    Ok(out)
}

fn find_open_brace(chars: &[char]) -> std::result::Result<Option<usize>, String> {
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 2,
            '[' => {
                i = parse_class(chars, i)?.1;
            }
            '{' => return Ok(Some(i)),
            _ => i += 1,
        }
    }
    Ok(None)
}

fn find_matching_brace(chars: &[char], open: usize) -> Option<usize> {
    let mut depth = 0;
    let mut i = open;
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 1,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
        i += 1;
    }
    None
}

fn split_top_level_commas(inner: &str) -> Vec<String> {
    let mut parts = vec![String::new()];
    let mut depth = 0;
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                let part = parts.last_mut().unwrap();
                part.push(c);
                if let Some(n) = chars.next() {
                    part.push(n);
                }
                continue;
            }
            '{' => depth += 1,
            '}' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(String::new());
                continue;
            }
            _ => {}
        }
        parts.last_mut().unwrap().push(c);
    }
    parts
}
