//! Line-oriented text formats: `.onto` ontologies and `.links` cross-link files.
//!
//! ```text
//! ontology smart_home "Smart Home Data Ontology"
//! domain "Services"
//!   class "Energy"
//!     feature "Gas"   # comment
//! ```
//!
//! Indentation is exactly two spaces per level. Link files hold one
//! `link <qid> -> <qid> : <relation>` per line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::crossdep::CrossLink;
use crate::ontology::{is_slug, ConceptId, ConceptKind, Ontology, OntologyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorCode {
    BadIndent,
    UnknownKeyword,
    UnterminatedString,
    BadEscape,
    IllegalKind,
    DuplicateSibling,
    EmptyLabel,
    BadQualifiedId,
    UnknownConcept,
    SameOntology,
    DuplicateLink,
    UnknownPredicate,
    UnknownMode,
    DuplicateRuleId,
    Syntax,
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A located diagnostic. `line` and `column` are 1-based and point at the
/// first offending character; columns count Unicode scalar values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{file}:{line}:{column} {code} {message}")]
pub struct ParseError {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub code: ErrorCode,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, code: ErrorCode, message: impl Into<String>) -> Self {
        ParseError {
            file: "<input>".to_owned(),
            line,
            column,
            code,
            message: message.into(),
        }
    }

    pub fn with_file(mut self, file: impl Into<String>) -> Self {
        self.file = file.into();
        self
    }
}

/// Splits input into `(line_no, line)` pairs, accepting LF or CRLF.
pub(crate) fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

/// Character cursor over a single line with 1-based column tracking.
pub(crate) struct Cursor<'a> {
    line_no: usize,
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(line_no: usize, line: &'a str) -> Self {
        Cursor {
            line_no,
            chars: line.chars().collect(),
            pos: 0,
            _src: line,
        }
    }

    pub(crate) fn column(&self) -> usize {
        self.pos + 1
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    pub(crate) fn error(&self, code: ErrorCode, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line_no, self.column(), code, message)
    }

    pub(crate) fn error_at(&self, column: usize, code: ErrorCode, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line_no, column, code, message)
    }

    /// Skips spaces and tabs, returning how many were skipped.
    pub(crate) fn skip_ws(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
        self.pos - start
    }

    /// Reads a run of `[A-Za-z0-9_]`.
    pub(crate) fn word(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    /// Reads a run of non-whitespace characters.
    pub(crate) fn token(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if !c.is_whitespace() && c != '#') {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    /// Reads a double-quoted string with `\"` and `\\` escapes.
    pub(crate) fn quoted(&mut self) -> Result<String, ParseError> {
        let open = self.column();
        if self.bump() != Some('"') {
            return Err(self.error_at(open, ErrorCode::Syntax, "expected `\"`"));
        }
        let mut out = String::new();
        loop {
            let col = self.column();
            match self.bump() {
                None => return Err(self.error_at(open, ErrorCode::UnterminatedString, "string is not closed")),
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some(c @ ('"' | '\\')) => out.push(c),
                    _ => {
                        return Err(self.error_at(col, ErrorCode::BadEscape, "only \\\" and \\\\ escapes are allowed"))
                    }
                },
                Some(c) => out.push(c),
            }
        }
    }

    /// Accepts trailing whitespace and an optional `#` comment.
    pub(crate) fn expect_end(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            None | Some('#') => Ok(()),
            Some(_) => Err(self.error(ErrorCode::Syntax, "unexpected trailing text")),
        }
    }

    pub(crate) fn at_end_or_comment(&self) -> bool {
        matches!(self.peek(), None | Some('#'))
    }
}

pub(crate) fn is_blank_or_comment(line: &str) -> bool {
    let t = line.trim_start_matches([' ', '\t']);
    t.is_empty() || t.starts_with('#')
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn parse_header(cur: &mut Cursor<'_>) -> Result<Ontology, ParseError> {
    let kw_col = cur.column();
    let kw = cur.word();
    if kw != "ontology" {
        return Err(cur.error_at(
            kw_col,
            ErrorCode::UnknownKeyword,
            "expected `ontology <slug> \"<title>\"` header",
        ));
    }
    if cur.skip_ws() == 0 {
        return Err(cur.error(ErrorCode::Syntax, "expected ontology slug"));
    }
    let slug_col = cur.column();
    let slug = cur.token();
    if !is_slug(&slug) {
        return Err(cur.error_at(slug_col, ErrorCode::Syntax, format!("invalid ontology slug `{slug}`")));
    }
    if cur.skip_ws() == 0 {
        return Err(cur.error(ErrorCode::Syntax, "expected quoted title"));
    }
    let title = cur.quoted()?;
    cur.expect_end()?;
    Ok(Ontology::new(slug, title).expect("slug checked"))
}

/// Parses `.onto` text. The result always passes [`Ontology::validate`].
pub fn parse_ontology(text: &str) -> Result<Ontology, ParseError> {
    let mut onto: Option<Ontology> = None;
    // Ancestors of the next line, indexed by depth.
    let mut stack: Vec<ConceptId> = Vec::new();

    for (line_no, line) in lines(text) {
        if is_blank_or_comment(line) {
            continue;
        }
        let mut cur = Cursor::new(line_no, line);
        let Some(onto) = onto.as_mut() else {
            if line.starts_with([' ', '\t']) {
                return Err(cur.error(ErrorCode::BadIndent, "header must not be indented"));
            }
            onto = Some(parse_header(&mut cur)?);
            continue;
        };

        let mut indent = 0;
        while let Some(c) = cur.peek() {
            match c {
                ' ' => {
                    indent += 1;
                    cur.bump();
                }
                '\t' => return Err(cur.error(ErrorCode::BadIndent, "tabs are not allowed in indentation")),
                _ => break,
            }
        }
        if indent % 2 != 0 {
            return Err(cur.error(
                ErrorCode::BadIndent,
                format!("indentation of {indent} spaces is not a multiple of 2"),
            ));
        }
        let depth = indent / 2;
        if depth > stack.len() {
            return Err(cur.error(
                ErrorCode::BadIndent,
                format!("indentation jumps to depth {depth}, expected at most {}", stack.len()),
            ));
        }
        stack.truncate(depth);

        let kw_col = cur.column();
        let word = cur.word();
        let Some(kind) = ConceptKind::from_keyword(&word) else {
            return Err(cur.error_at(
                kw_col,
                ErrorCode::UnknownKeyword,
                format!("unknown concept kind `{word}`"),
            ));
        };
        if cur.skip_ws() == 0 {
            return Err(cur.error(ErrorCode::Syntax, "expected quoted label"));
        }
        let label_col = cur.column();
        let label = cur.quoted()?;
        cur.expect_end()?;

        let id = onto.add_concept(stack.last(), &label, kind).map_err(|e| match e {
            OntologyError::IllegalKind { .. } => cur.error_at(kw_col, ErrorCode::IllegalKind, e.to_string()),
            OntologyError::DuplicateSibling { .. } => {
                cur.error_at(label_col, ErrorCode::DuplicateSibling, e.to_string())
            }
            OntologyError::EmptyLabel => cur.error_at(label_col, ErrorCode::EmptyLabel, e.to_string()),
            other => cur.error_at(kw_col, ErrorCode::Syntax, other.to_string()),
        })?;
        stack.push(id);
    }

    let line_count = text.split('\n').count();
    onto.ok_or_else(|| {
        ParseError::new(
            line_count.max(1),
            1,
            ErrorCode::UnknownKeyword,
            "missing `ontology` header",
        )
    })
}

/// Canonical `.onto` text: header, pre-order body, two-space indent, LF endings.
pub fn serialize_ontology(onto: &Ontology) -> String {
    let mut out = format!("ontology {} {}\n", onto.slug(), quote(onto.title()));
    for (depth, concept) in onto.preorder() {
        for _ in 0..depth {
            out.push_str("  ");
        }
        out.push_str(concept.kind().keyword());
        out.push(' ');
        out.push_str(&quote(concept.label()));
        out.push('\n');
    }
    out
}

fn parse_qid(cur: &mut Cursor<'_>) -> Result<(usize, ConceptId), ParseError> {
    let col = cur.column();
    let tok = cur.token();
    tok.parse::<ConceptId>().map(|id| (col, id)).map_err(|_| {
        cur.error_at(
            col,
            ErrorCode::BadQualifiedId,
            format!("`{tok}` is not a qualified concept id"),
        )
    })
}

fn expect_symbol(cur: &mut Cursor<'_>, sym: &str) -> Result<(), ParseError> {
    if cur.skip_ws() == 0 {
        return Err(cur.error(ErrorCode::Syntax, format!("expected ` {sym} `")));
    }
    let col = cur.column();
    let tok = cur.token();
    if tok != sym {
        return Err(cur.error_at(col, ErrorCode::Syntax, format!("expected `{sym}`, found `{tok}`")));
    }
    if cur.skip_ws() == 0 {
        return Err(cur.error(ErrorCode::Syntax, format!("expected whitespace after `{sym}`")));
    }
    Ok(())
}

/// Parses a `.links` file, resolving every endpoint against `ontologies`.
pub fn parse_links<'a>(
    text: &str,
    ontologies: impl IntoIterator<Item = &'a Ontology>,
) -> Result<Vec<CrossLink>, ParseError> {
    let by_slug: BTreeMap<&str, &Ontology> = ontologies.into_iter().map(|o| (o.slug(), o)).collect();
    let mut links = Vec::new();
    let mut seen = BTreeSet::new();

    for (line_no, line) in lines(text) {
        if is_blank_or_comment(line) {
            continue;
        }
        let mut cur = Cursor::new(line_no, line);
        if cur.skip_ws() > 0 {
            return Err(cur.error_at(1, ErrorCode::BadIndent, "link lines must not be indented"));
        }
        let kw_col = cur.column();
        let kw = cur.word();
        if kw != "link" {
            return Err(cur.error_at(
                kw_col,
                ErrorCode::UnknownKeyword,
                format!("expected `link`, found `{kw}`"),
            ));
        }
        if cur.skip_ws() == 0 {
            return Err(cur.error(ErrorCode::Syntax, "expected source id"));
        }
        let (src_col, source) = parse_qid(&mut cur)?;
        expect_symbol(&mut cur, "->")?;
        let (dst_col, target) = parse_qid(&mut cur)?;
        expect_symbol(&mut cur, ":")?;
        let rel_col = cur.column();
        let relation = cur.token();
        if !is_slug(&relation) {
            return Err(cur.error_at(
                rel_col,
                ErrorCode::Syntax,
                format!("invalid relation slug `{relation}`"),
            ));
        }
        cur.expect_end()?;

        for (col, id) in [(src_col, &source), (dst_col, &target)] {
            let known = by_slug.get(id.ontology()).is_some_and(|o| o.contains(id));
            if !known {
                return Err(cur.error_at(col, ErrorCode::UnknownConcept, format!("unknown concept {id}")));
            }
        }
        let link = CrossLink::new(source, target, relation)
            .map_err(|e| cur.error_at(src_col, ErrorCode::SameOntology, e.to_string()))?;
        if !seen.insert(link.clone()) {
            return Err(cur.error_at(kw_col, ErrorCode::DuplicateLink, format!("duplicate link {link}")));
        }
        links.push(link);
    }
    Ok(links)
}

/// One `link` line per entry, in order.
pub fn serialize_links(links: &[CrossLink]) -> String {
    links.iter().map(|l| format!("{l}\n")).collect()
}
