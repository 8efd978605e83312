//! Reading and writing thread files (`ILT v1`) and constraint files
//! (`ILC v1`).
//!
//! ```text
//! ILT v1
//! # comment
//! thread kt1
//! concept knn1 "World"
//! concept knn2 "Thing"
//! aku knn1
//! link knn1 knn2 strands=has:0.9;part:0.5
//! end
//! ```
//!
//! Tokens are separated by single spaces. A `link` without `strands=` gets
//! one strand `rel:0.5`. Concept ids are global: the same id in two files
//! names the same concept.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use ils_core::concept::{is_token, ConceptError};
use ils_core::{Concept, ConceptId, ConstraintSet, Csd, CsdError, Strand, StrandedLink};
use thiserror::Error;

pub const THREAD_HEADER: &str = "ILT v1";
pub const CONSTRAINT_HEADER: &str = "ILC v1";

/// Why a syntactically well-formed thread block is not a valid thread.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error(transparent)]
    Concept(#[from] ConceptError),
    #[error(transparent)]
    Csd(#[from] CsdError),
}

impl ValidationError {
    pub fn kind(&self) -> &'static str {
        match self {
            ValidationError::Concept(ConceptError::SelfLoop(_)) => "SelfLoop",
            ValidationError::Concept(_) => "InvalidConcept",
            ValidationError::Csd(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("thread {block}: {source}")]
    Invalid {
        block: String,
        #[source]
        source: ValidationError,
    },
    #[error("thread {thread}: {what} cannot be written: {reason}")]
    Unrepresentable {
        thread: String,
        what: String,
        reason: &'static str,
    },
}

fn parse_err(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        reason: reason.into(),
    }
}

/// A parsed but not yet validated `thread ... end` block.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreadBlock {
    pub id: String,
    /// 1-based line of the `thread` keyword.
    pub line: usize,
    pub concepts: Vec<Concept>,
    pub akus: BTreeSet<ConceptId>,
    pub links: Vec<(ConceptId, ConceptId, Vec<Strand>)>,
}

impl ThreadBlock {
    pub fn validate(&self, decay: f64) -> Result<Csd, ValidationError> {
        let links = self
            .links
            .iter()
            .map(|(a, b, s)| StrandedLink::new(a.clone(), b.clone(), s.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Csd::build(
            self.id.clone(),
            self.concepts.clone(),
            links,
            self.akus.clone(),
            decay,
        )?)
    }
}

/// Decodes UTF-8, reporting the line of the first bad byte.
pub fn decode(bytes: &[u8]) -> Result<&str, FormatError> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        parse_err(line, "invalid UTF-8")
    })
}

/// Non-blank, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn expect_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    header: &str,
) -> Result<(), FormatError> {
    match lines.next() {
        Some((_, l)) if l == header => Ok(()),
        Some((n, l)) => Err(parse_err(n, format!("expected `{header}`, found `{l}`"))),
        None => Err(parse_err(1, format!("missing `{header}` header"))),
    }
}

/// Splits on single spaces; empty tokens mean doubled or edge whitespace.
fn tokens(line: usize, text: &str) -> Result<Vec<&str>, FormatError> {
    let toks: Vec<&str> = text.split(' ').collect();
    if toks.iter().any(|t| t.is_empty()) {
        return Err(parse_err(line, "tokens must be separated by single spaces"));
    }
    Ok(toks)
}

fn concept_id(line: usize, tok: &str) -> Result<ConceptId, FormatError> {
    ConceptId::new(tok).map_err(|_| parse_err(line, format!("invalid concept id `{tok}`")))
}

/// Parses `"label"` at the start of `text`, returning the label and the rest.
fn quoted(line: usize, text: &str) -> Result<(&str, &str), FormatError> {
    let body = text
        .strip_prefix('"')
        .ok_or_else(|| parse_err(line, "expected a quoted label"))?;
    let end = body
        .find('"')
        .ok_or_else(|| parse_err(line, "unterminated label"))?;
    let label = &body[..end];
    if label.is_empty() {
        return Err(parse_err(line, "empty label"));
    }
    Ok((label, &body[end + 1..]))
}

fn weight(line: usize, tok: &str) -> Result<f64, FormatError> {
    let (int, frac) = tok.split_once('.').unwrap_or((tok, "0"));
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || !digits(frac) {
        return Err(parse_err(line, format!("`{tok}` is not a decimal literal")));
    }
    let w: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("`{tok}` is not a decimal literal")))?;
    if !(w > 0.0 && w <= 1.0) {
        return Err(parse_err(line, format!("weight {tok} is outside (0, 1]")));
    }
    Ok(w)
}

fn strands(line: usize, spec: &str) -> Result<Vec<Strand>, FormatError> {
    spec.split(';')
        .map(|part| {
            let (label, w) = part
                .rsplit_once(':')
                .ok_or_else(|| parse_err(line, format!("strand `{part}` is not `label:weight`")))?;
            if label.is_empty() || label.contains(':') {
                return Err(parse_err(line, format!("bad strand label in `{part}`")));
            }
            Strand::new(label, weight(line, w)?).map_err(|e| parse_err(line, e.to_string()))
        })
        .collect()
}

/// Parses the block structure of a thread file without validating threads.
pub fn parse_thread_blocks(text: &str) -> Result<Vec<ThreadBlock>, FormatError> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, THREAD_HEADER)?;

    let mut blocks: Vec<ThreadBlock> = Vec::new();
    let mut labels: BTreeMap<ConceptId, String> = BTreeMap::new();
    let mut open: Option<ThreadBlock> = None;

    for (n, line) in lines {
        let (keyword, rest) = line.split_once(' ').unwrap_or((line, ""));
        match (keyword, open.as_mut()) {
            ("thread", None) => {
                let toks = tokens(n, rest)?;
                if toks.len() != 1 || !is_token(toks[0]) {
                    return Err(parse_err(n, "expected `thread <id>`"));
                }
                if blocks.iter().any(|b| b.id == toks[0]) {
                    return Err(parse_err(n, format!("thread `{}` defined twice", toks[0])));
                }
                open = Some(ThreadBlock {
                    id: toks[0].to_string(),
                    line: n,
                    concepts: Vec::new(),
                    akus: BTreeSet::new(),
                    links: Vec::new(),
                });
            }
            ("thread", Some(b)) => {
                return Err(parse_err(n, format!("thread `{}` is missing `end`", b.id)));
            }
            ("end", Some(_)) if rest.is_empty() && !line.ends_with(' ') => {
                blocks.push(open.take().expect("open block"));
            }
            ("concept", Some(b)) => {
                let (cid, tail) = rest
                    .split_once(' ')
                    .ok_or_else(|| parse_err(n, "expected `concept <id> \"<label>\"`"))?;
                let id = concept_id(n, cid)?;
                let (label, after) = quoted(n, tail)?;
                if !after.is_empty() {
                    return Err(parse_err(n, "unexpected text after label"));
                }
                match labels.get(&id) {
                    Some(prev) if prev != label => {
                        return Err(parse_err(
                            n,
                            format!("concept {id} relabelled from \"{prev}\" to \"{label}\""),
                        ));
                    }
                    _ => {
                        labels.insert(id.clone(), label.to_string());
                    }
                }
                b.concepts
                    .push(Concept::new(id, label).map_err(|e| parse_err(n, e.to_string()))?);
            }
            ("aku", Some(b)) => {
                let toks = tokens(n, rest)?;
                if toks.len() != 1 {
                    return Err(parse_err(n, "expected `aku <id>`"));
                }
                let id = concept_id(n, toks[0])?;
                if !b.akus.insert(id) {
                    return Err(parse_err(n, format!("aku {} repeated", toks[0])));
                }
            }
            ("link", Some(b)) => {
                let toks = tokens(n, rest)?;
                let strand_list = match toks.as_slice() {
                    [_, _] => vec![Strand::default()],
                    [_, _, spec] => {
                        let spec = spec
                            .strip_prefix("strands=")
                            .ok_or_else(|| parse_err(n, "expected `strands=...`"))?;
                        strands(n, spec)?
                    }
                    _ => return Err(parse_err(n, "expected `link <id> <id> [strands=...]`")),
                };
                b.links.push((
                    concept_id(n, toks[0])?,
                    concept_id(n, toks[1])?,
                    strand_list,
                ));
            }
            (_, None) => {
                return Err(parse_err(
                    n,
                    format!("expected `thread <id>`, found `{line}`"),
                ));
            }
            (_, Some(_)) => {
                return Err(parse_err(n, format!("unrecognised line `{line}`")));
            }
        }
    }
    if let Some(b) = open {
        return Err(parse_err(
            b.line,
            format!("thread `{}` is missing `end`", b.id),
        ));
    }
    Ok(blocks)
}

/// Parses and validates every thread of a file.
pub fn parse_thread_file(bytes: &[u8], decay: f64) -> Result<Vec<Csd>, FormatError> {
    parse_thread_blocks(decode(bytes)?)?
        .into_iter()
        .map(|b| {
            b.validate(decay).map_err(|source| FormatError::Invalid {
                block: b.id.clone(),
                source,
            })
        })
        .collect()
}

fn unrepresentable(thread: &Csd, what: String, reason: &'static str) -> FormatError {
    FormatError::Unrepresentable {
        thread: thread.id().to_string(),
        what,
        reason,
    }
}

/// Writes threads as an `ILT v1` file. Concepts, AKUs and links come out in
/// ascending id order; weights use the shortest decimal that round-trips.
pub fn serialize_threads<'a>(
    threads: impl IntoIterator<Item = &'a Csd>,
) -> Result<String, FormatError> {
    let mut out = String::from(THREAD_HEADER);
    out.push('\n');
    for t in threads {
        writeln!(out, "\nthread {}", t.id()).unwrap();
        for c in t.concepts() {
            if c.label.contains(['"', '\n', '\r']) {
                return Err(unrepresentable(
                    t,
                    format!("label of {}", c.id),
                    "labels may not contain quotes or line breaks",
                ));
            }
            writeln!(out, "concept {} \"{}\"", c.id, c.label).unwrap();
        }
        for a in t.akus() {
            writeln!(out, "aku {a}").unwrap();
        }
        for l in t.links() {
            let (a, b) = l.endpoints();
            write!(out, "link {a} {b} strands=").unwrap();
            for (i, s) in l.strands().iter().enumerate() {
                let p = s.property();
                if p.contains([' ', ';', ':', '\n', '\r']) {
                    return Err(unrepresentable(
                        t,
                        format!("strand `{p}` of {a}--{b}"),
                        "strand labels may not contain spaces, ';', ':' or line breaks",
                    ));
                }
                if i > 0 {
                    out.push(';');
                }
                write!(out, "{}:{}", p, s.weight()).unwrap();
            }
            out.push('\n');
        }
        out.push_str("end\n");
    }
    Ok(out)
}

/// Parses an `ILC v1` constraint file.
pub fn parse_constraints(bytes: &[u8]) -> Result<ConstraintSet, FormatError> {
    let text = decode(bytes)?;
    let mut lines = content_lines(text);
    expect_header(&mut lines, CONSTRAINT_HEADER)?;
    let mut set = ConstraintSet::new();
    for (n, line) in lines {
        let rest = line
            .strip_prefix("incompatible ")
            .ok_or_else(|| parse_err(n, format!("expected `incompatible`, found `{line}`")))?;
        let (a, tail) = quoted(n, rest)?;
        let tail = tail
            .strip_prefix(' ')
            .ok_or_else(|| parse_err(n, "expected a second quoted label"))?;
        let (b, after) = quoted(n, tail)?;
        if !after.is_empty() {
            return Err(parse_err(n, "unexpected text after labels"));
        }
        set.add_incompatible(a, b)
            .map_err(|e| parse_err(n, e.to_string()))?;
    }
    Ok(set)
}
