//! The `.aldc.json` code file: rendering, parsing and validation with
//! line-located diagnostics.
//!
//! ```json
//! {
//!   "version": 1,
//!   "d": 2,
//!   "q": 2,
//!   "vectors": [
//!     [0.0000000000000000e0, 0.0000000000000000e0],
//!     [1.0000000000000000e0, 0.0000000000000000e0]
//!   ],
//!   "matchings": [
//!     {"direction": 0, "tuples": [[0, 1]]}
//!   ]
//! }
//! ```
//!
//! Coordinates are written with 17 significant digits, enough to reproduce
//! every `f64` bit for bit. Directions without tuples may be omitted.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::code::{CodeConfig, DirectionMatching, RealVec, Tuple};
use crate::error::Error;

pub const EXTENSION: &str = ".aldc.json";
pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingEntry {
    pub direction: usize,
    pub tuples: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeFile {
    pub version: u64,
    pub d: usize,
    pub q: usize,
    pub vectors: Vec<Vec<f64>>,
    pub matchings: Vec<MatchingEntry>,
}

impl From<&CodeConfig> for CodeFile {
    fn from(code: &CodeConfig) -> Self {
        CodeFile {
            version: FORMAT_VERSION,
            d: code.d(),
            q: code.q(),
            vectors: code.points().iter().map(|p| p.to_vec()).collect(),
            matchings: code
                .matchings()
                .iter()
                .filter(|m| !m.tuples.is_empty())
                .map(|m| MatchingEntry {
                    direction: m.direction,
                    tuples: m.tuples.iter().map(|t| t.indices().to_vec()).collect(),
                })
                .collect(),
        }
    }
}

impl Serialize for CodeConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CodeFile::from(self).serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u64),
    #[error("{0}")]
    Invalid(Error),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Error)]
pub struct ParseError {
    /// 1-based line of the offending value, when known.
    pub line: Option<usize>,
    pub kind: ParseErrorKind,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

fn render_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders `code` in the file format, one vector per line.
pub fn render(code: &CodeConfig) -> String {
    let file = CodeFile::from(code);
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"version\": {},", file.version);
    let _ = writeln!(out, "  \"d\": {},", file.d);
    let _ = writeln!(out, "  \"q\": {},", file.q);
    out.push_str("  \"vectors\": [\n");
    for (j, v) in file.vectors.iter().enumerate() {
        let coords: Vec<String> = v.iter().map(|&x| render_f64(x)).collect();
        let sep = if j + 1 < file.vectors.len() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", coords.join(", "));
    }
    out.push_str("  ],\n");
    if file.matchings.is_empty() {
        out.push_str("  \"matchings\": []\n");
    } else {
        out.push_str("  \"matchings\": [\n");
        for (m, entry) in file.matchings.iter().enumerate() {
            let tuples: Vec<String> = entry
                .tuples
                .iter()
                .map(|t| format!("[{}]", t.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(", ")))
                .collect();
            let sep = if m + 1 < file.matchings.len() { "," } else { "" };
            let _ = writeln!(
                out,
                "    {{\"direction\": {}, \"tuples\": [{}]}}{sep}",
                entry.direction,
                tuples.join(", ")
            );
        }
        out.push_str("  ]\n");
    }
    out.push_str("}\n");
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Seg {
    Key(String),
    Index(usize),
}

/// Start line of every value in a syntactically valid JSON document,
/// keyed by its path.
struct Locator {
    lines: HashMap<Vec<Seg>, usize>,
}

impl Locator {
    fn new(text: &str) -> Self {
        let mut scan = Scanner {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            lines: HashMap::new(),
        };
        let mut path = Vec::new();
        scan.value(&mut path);
        Locator { lines: scan.lines }
    }

    /// Line of the deepest recorded prefix of `path`.
    fn line(&self, path: &[Seg]) -> Option<usize> {
        (0..=path.len()).rev().find_map(|l| self.lines.get(&path[..l]).copied())
    }
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    lines: HashMap<Vec<Seg>, usize>,
}

impl Scanner {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\n' | '\r')) {
            self.bump();
        }
    }

    fn string(&mut self) -> String {
        let mut s = String::new();
        self.bump();
        while let Some(c) = self.bump() {
            match c {
                '"' => break,
                '\\' => {
                    if let Some(e) = self.bump() {
                        s.push(e);
                    }
                }
                _ => s.push(c),
            }
        }
        s
    }

    fn value(&mut self, path: &mut Vec<Seg>) {
        self.ws();
        self.lines.insert(path.clone(), self.line);
        match self.peek() {
            Some('{') => {
                self.bump();
                loop {
                    self.ws();
                    match self.peek() {
                        Some('"') => {
                            let key = self.string();
                            self.ws();
                            self.bump();
                            path.push(Seg::Key(key));
                            self.value(path);
                            path.pop();
                            self.ws();
                            if self.peek() == Some(',') {
                                self.bump();
                            }
                        }
                        Some('}') | None => {
                            self.bump();
                            break;
                        }
                        Some(_) => {
                            self.bump();
                        }
                    }
                }
            }
            Some('[') => {
                self.bump();
                let mut idx = 0;
                loop {
                    self.ws();
                    match self.peek() {
                        Some(']') | None => {
                            self.bump();
                            break;
                        }
                        _ => {
                            path.push(Seg::Index(idx));
                            self.value(path);
                            path.pop();
                            idx += 1;
                            self.ws();
                            if self.peek() == Some(',') {
                                self.bump();
                            }
                        }
                    }
                }
            }
            Some('"') => {
                self.string();
            }
            _ => {
                while !matches!(self.peek(), None | Some(',' | ']' | '}' | ' ' | '\t' | '\n' | '\r')) {
                    self.bump();
                }
            }
        }
    }
}

fn key(k: &str) -> Seg {
    Seg::Key(k.to_string())
}

/// Parses and validates a code file. Every invariant of [`CodeConfig`] is
/// enforced; violations point at the line of the offending value.
pub fn parse(text: &str) -> Result<CodeConfig, ParseError> {
    let file: CodeFile = serde_json::from_str(text).map_err(|e| ParseError {
        line: (e.line() > 0).then_some(e.line()),
        kind: ParseErrorKind::Syntax(e.to_string()),
    })?;
    let loc = Locator::new(text);
    let fail = |path: Vec<Seg>, err: Error| ParseError {
        line: loc.line(&path),
        kind: ParseErrorKind::Invalid(err),
    };

    if file.version != FORMAT_VERSION {
        return Err(ParseError {
            line: loc.line(&[key("version")]),
            kind: ParseErrorKind::UnsupportedVersion(file.version),
        });
    }
    for (name, value) in [("d", file.d), ("q", file.q)] {
        if value == 0 {
            return Err(fail(vec![key(name)], Error::InvalidParameter(format!("{name} must be at least 1"))));
        }
    }
    if file.vectors.is_empty() {
        return Err(fail(vec![key("vectors")], Error::InvalidParameter("code needs at least one point".into())));
    }
    for (j, v) in file.vectors.iter().enumerate() {
        if v.len() != file.d {
            return Err(fail(
                vec![key("vectors"), Seg::Index(j)],
                Error::DimensionMismatch {
                    point: j,
                    expected: file.d,
                    got: v.len(),
                },
            ));
        }
    }
    let n = file.vectors.len();
    let mut seen_directions = HashSet::new();
    let mut matchings = Vec::with_capacity(file.matchings.len());
    for (m, entry) in file.matchings.iter().enumerate() {
        let at = |rest: &[Seg]| {
            let mut p = vec![key("matchings"), Seg::Index(m)];
            p.extend_from_slice(rest);
            p
        };
        let direction = entry.direction;
        if direction >= file.d {
            return Err(fail(at(&[key("direction")]), Error::DirectionOutOfRange { direction, d: file.d }));
        }
        if !seen_directions.insert(direction) {
            return Err(fail(at(&[key("direction")]), Error::DuplicateDirection { direction }));
        }
        let mut used = HashSet::new();
        let mut tuples = Vec::with_capacity(entry.tuples.len());
        for (t, raw) in entry.tuples.iter().enumerate() {
            let here = at(&[key("tuples"), Seg::Index(t)]);
            if raw.len() != file.q {
                return Err(fail(
                    here,
                    Error::TupleSize {
                        direction,
                        expected: file.q,
                        got: raw.len(),
                    },
                ));
            }
            if let Some(&index) = raw.iter().find(|&&j| j >= n) {
                return Err(fail(here, Error::IndexOutOfRange { direction, index, n }));
            }
            let tuple = Tuple::new(raw.clone()).ok_or_else(|| fail(here.clone(), Error::RepeatedIndex { direction }))?;
            if let Some(&index) = tuple.indices().iter().find(|j| !used.insert(**j)) {
                return Err(fail(here, Error::NotDisjoint { direction, index }));
            }
            tuples.push(tuple);
        }
        matchings.push(DirectionMatching::new(direction, tuples));
    }
    let points = file.vectors.into_iter().map(RealVec::new).collect();
    CodeConfig::new(file.d, file.q, points, matchings).map_err(|e| ParseError {
        line: None,
        kind: ParseErrorKind::Invalid(e),
    })
}

/// `path` with [`EXTENSION`] appended unless already present.
pub fn with_extension(path: &Path) -> PathBuf {
    let s = path.as_os_str().to_string_lossy();
    if s.ends_with(EXTENSION) {
        path.to_path_buf()
    } else {
        PathBuf::from(format!("{s}{EXTENSION}"))
    }
}

/// Reads `path`, falling back to `path` + [`EXTENSION`] when it does not exist.
pub fn read_code(path: &Path) -> Result<CodeConfig, ParseError> {
    let target = if path.exists() { path.to_path_buf() } else { with_extension(path) };
    let text = std::fs::read_to_string(&target).map_err(|e| ParseError {
        line: None,
        kind: ParseErrorKind::Io {
            path: target.display().to_string(),
            message: e.to_string(),
        },
    })?;
    parse(&text)
}

/// Writes `code` to `path` with [`EXTENSION`] appended when missing;
/// returns the path written.
pub fn write_code(code: &CodeConfig, path: &Path) -> std::io::Result<PathBuf> {
    let target = with_extension(path);
    std::fs::write(&target, render(code))?;
    Ok(target)
}

/// Pretty JSON for any report, newline terminated.
pub fn report_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}
