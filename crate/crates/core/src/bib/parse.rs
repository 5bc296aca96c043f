use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use serde::Serialize;

use super::{valid_key, BibEntry, KEYWORDS_FIELD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A problem found while parsing, with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOutput {
    pub entries: Vec<BibEntry>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseOutput {
    pub fn errors(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }
}

/// Parses raw bytes. Invalid UTF-8 sequences become U+FFFD and each one is
/// reported as a warning.
pub fn parse_bibtex_bytes(bytes: &[u8]) -> ParseOutput {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_bibtex(text),
        Err(_) => {
            let mut text = String::with_capacity(bytes.len());
            let mut bad_offsets = Vec::new();
            for chunk in bytes.utf8_chunks() {
                text.push_str(chunk.valid());
                if !chunk.invalid().is_empty() {
                    bad_offsets.push(text.len());
                    text.push(char::REPLACEMENT_CHARACTER);
                }
            }
            let mut out = parse_bibtex(&text);
            let lines = LineIndex::new(&text);
            let mut diags: Vec<ParseDiagnostic> = bad_offsets
                .into_iter()
                .map(|off| {
                    let (line, column) = lines.position(&text, off);
                    ParseDiagnostic {
                        severity: Severity::Warning,
                        message: "invalid UTF-8 sequence replaced with U+FFFD".into(),
                        line,
                        column,
                    }
                })
                .collect();
            diags.append(&mut out.diagnostics);
            diags.sort_by_key(|d| (d.line, d.column));
            out.diagnostics = diags;
            out
        }
    }
}

/// Parses BibTeX text. Never fails as a whole: malformed entries are skipped
/// and reported, `@comment`, `@preamble` and text between entries are ignored.
pub fn parse_bibtex(text: &str) -> ParseOutput {
    let mut parser = Parser::new(text);
    parser.run();
    ParseOutput {
        entries: parser.entries,
        diagnostics: parser.diagnostics,
    }
}

struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    fn position(&self, text: &str, offset: usize) -> (usize, usize) {
        let offset = offset.min(text.len());
        let line = self.starts.partition_point(|&s| s <= offset);
        let start = self.starts[line - 1];
        let column = text[start..offset].chars().count() + 1;
        (line, column)
    }
}

#[derive(Debug)]
struct Failure {
    offset: usize,
    message: String,
}

type PResult<T> = Result<T, Failure>;

const MONTHS: [(&str, &str); 12] = [
    ("jan", "January"),
    ("feb", "February"),
    ("mar", "March"),
    ("apr", "April"),
    ("may", "May"),
    ("jun", "June"),
    ("jul", "July"),
    ("aug", "August"),
    ("sep", "September"),
    ("oct", "October"),
    ("nov", "November"),
    ("dec", "December"),
];

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    lines: LineIndex,
    macros: HashMap<String, String>,
    entries: Vec<BibEntry>,
    diagnostics: Vec<ParseDiagnostic>,
    seen_keys: HashSet<String>,
}

pub(super) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '.' | '+' | '/' | '\'' | '!' | '?' | '*' | '&' | '<' | '>' | '[' | ']' | ';' | '|' | '`' | '~' | '^')
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            text,
            pos: 0,
            lines: LineIndex::new(text),
            macros: MONTHS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            entries: Vec::new(),
            diagnostics: Vec::new(),
            seen_keys: HashSet::new(),
        }
    }

    fn diag(&mut self, severity: Severity, offset: usize, message: impl Into<String>) {
        let (line, column) = self.lines.position(self.text, offset);
        self.diagnostics.push(ParseDiagnostic {
            severity,
            message: message.into(),
            line,
            column,
        });
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn read_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if pred(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }

    fn run(&mut self) {
        while let Some(rel) = self.text[self.pos..].find('@') {
            let at = self.pos + rel;
            self.pos = at + 1;
            self.skip_ws();
            let kind = self.read_while(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-').to_ascii_lowercase();
            if kind.is_empty() {
                continue;
            }
            self.skip_ws();
            let open = match self.peek() {
                Some(c @ ('{' | '(')) => c,
                // an `@` in free text
                _ => continue,
            };
            self.bump();
            let close = if open == '{' { '}' } else { ')' };
            let result = match kind.as_str() {
                "comment" => {
                    if self.skip_group(open, close).is_err() {
                        // unterminated comment: the rest is free text
                        self.pos = at + 1;
                    }
                    continue;
                }
                "preamble" => self.skip_group(open, close),
                "string" => self.parse_string_def(close),
                _ => self.parse_entry(&kind, at, close),
            };
            if let Err(f) = result {
                self.diag(Severity::Error, f.offset, f.message);
                // resume scanning just past the failed `@`
                self.pos = at + 1;
            }
        }
    }

    /// Skips to the matching close delimiter of a group opened just before `pos`.
    fn skip_group(&mut self, open: char, close: char) -> PResult<()> {
        let start = self.pos;
        let mut depth = 1usize;
        while let Some(c) = self.bump() {
            if c == open {
                depth += 1;
            } else if c == close {
                depth -= 1;
                if depth == 0 {
                    return Ok(());
                }
            }
        }
        Err(Failure {
            offset: start,
            message: "unterminated group".into(),
        })
    }

    fn parse_string_def(&mut self, close: char) -> PResult<()> {
        self.skip_ws();
        let name_at = self.pos;
        let name = self.read_while(is_ident_char).to_ascii_lowercase();
        if name.is_empty() {
            return Err(Failure {
                offset: name_at,
                message: "expected macro name in @string".into(),
            });
        }
        self.skip_ws();
        self.expect('=', "expected `=` in @string")?;
        self.skip_ws();
        let value = self.parse_value(close)?;
        self.skip_ws();
        if self.peek() == Some(',') {
            self.bump();
            self.skip_ws();
        }
        self.expect(close, "expected end of @string")?;
        self.macros.insert(name, value);
        Ok(())
    }

    fn expect(&mut self, want: char, message: &str) -> PResult<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            None => Err(Failure {
                offset: self.pos,
                message: format!("{message}, found end of input"),
            }),
            Some(c) => Err(Failure {
                offset: self.pos,
                message: format!("{message}, found `{c}`"),
            }),
        }
    }

    fn parse_entry(&mut self, kind: &str, at: usize, close: char) -> PResult<()> {
        let unterminated = |_: &Self| Failure {
            offset: at,
            message: format!("unterminated @{kind} entry"),
        };
        self.skip_ws();
        let key_at = self.pos;
        let key = self
            .read_while(|c| !c.is_whitespace() && !matches!(c, ',' | '{' | '}' | '(' | ')' | '"' | '=' | '#' | '@'))
            .to_string();
        if key.is_empty() {
            return Err(if self.peek().is_none() {
                unterminated(self)
            } else {
                Failure {
                    offset: key_at,
                    message: "missing citation key".into(),
                }
            });
        }
        debug_assert!(valid_key(&key));
        self.skip_ws();
        let mut entry = BibEntry::new(kind, key.clone());
        let mut fields: IndexMap<String, String> = IndexMap::new();
        let mut warnings: Vec<(usize, String)> = Vec::new();
        match self.peek() {
            Some(c) if c == close => {
                self.bump();
            }
            Some(',') => {
                self.bump();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => return Err(unterminated(self)),
                        Some(c) if c == close => {
                            self.bump();
                            break;
                        }
                        _ => {}
                    }
                    let name_at = self.pos;
                    let name = self.read_while(is_ident_char).to_lowercase();
                    if name.is_empty() {
                        return Err(Failure {
                            offset: name_at,
                            message: format!("expected field name in entry `{key}`"),
                        });
                    }
                    self.skip_ws();
                    if self.peek().is_none() {
                        return Err(unterminated(self));
                    }
                    self.expect('=', &format!("expected `=` after field `{name}`"))?;
                    self.skip_ws();
                    let value = match self.parse_value(close) {
                        Ok(v) => v,
                        Err(f) if self.pos >= self.text.len() => {
                            return Err(Failure {
                                offset: at,
                                message: format!("unterminated @{kind} entry: {}", f.message),
                            })
                        }
                        Err(f) => return Err(f),
                    };
                    if fields.contains_key(&name) {
                        warnings.push((name_at, format!("duplicate field `{name}` in `{key}`; last value kept")));
                    }
                    fields.insert(name, value);
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => {
                            self.bump();
                        }
                        Some(c) if c == close => {
                            self.bump();
                            break;
                        }
                        None => return Err(unterminated(self)),
                        Some(c) => {
                            return Err(Failure {
                                offset: self.pos,
                                message: format!("expected `,` or `{close}` after field value, found `{c}`"),
                            })
                        }
                    }
                }
            }
            None => return Err(unterminated(self)),
            Some(c) => {
                return Err(Failure {
                    offset: self.pos,
                    message: format!("expected `,` after citation key, found `{c}`"),
                })
            }
        }

        for (off, w) in warnings {
            self.diag(Severity::Warning, off, w);
        }
        if let Some(kw) = fields.shift_remove(KEYWORDS_FIELD) {
            for issue in entry.absorb_keywords(&kw) {
                self.diag(Severity::Warning, at, format!("keyword `{}`: {}", issue.item, issue.error));
            }
        }
        entry.fields = fields;
        for problem in entry.check() {
            self.diag(Severity::Warning, at, format!("entry `{key}`: {problem}"));
        }
        if !self.seen_keys.insert(key.clone()) {
            self.diag(Severity::Warning, at, format!("duplicate citation key `{key}`"));
        }
        self.entries.push(entry);
        Ok(())
    }

    /// value := piece ('#' piece)*
    fn parse_value(&mut self, close: char) -> PResult<String> {
        let mut out = String::new();
        loop {
            self.skip_ws();
            let piece_at = self.pos;
            match self.peek() {
                Some('{') => {
                    self.bump();
                    out.push_str(self.braced_body()?);
                }
                Some('"') => {
                    self.bump();
                    out.push_str(self.quoted_body()?);
                }
                Some(c) if c.is_ascii_digit() => {
                    out.push_str(self.read_while(|c| c.is_ascii_digit()));
                }
                Some(c) if is_ident_char(c) => {
                    let name = self.read_while(is_ident_char);
                    match self.macros.get(&name.to_ascii_lowercase()) {
                        Some(v) => out.push_str(&v.clone()),
                        None => {
                            let name = name.to_string();
                            self.diag(Severity::Warning, piece_at, format!("undefined macro `{name}`"));
                            out.push_str(&name);
                        }
                    }
                }
                None => {
                    return Err(Failure {
                        offset: self.pos,
                        message: "expected field value, found end of input".into(),
                    })
                }
                Some(c) => {
                    let message = if c == close || c == ',' {
                        "empty field value".to_string()
                    } else {
                        format!("unexpected `{c}` in field value")
                    };
                    return Err(Failure { offset: self.pos, message });
                }
            }
            self.skip_ws();
            if self.peek() == Some('#') {
                self.bump();
                continue;
            }
            return Ok(out);
        }
    }

    /// Body of `{...}` with the opening brace already consumed.
    fn braced_body(&mut self) -> PResult<&'a str> {
        let start = self.pos;
        let mut depth = 1usize;
        while let Some(c) = self.bump() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(&self.text[start..self.pos - 1]);
                    }
                }
                _ => {}
            }
        }
        Err(Failure {
            offset: start - 1,
            message: "unterminated braced value".into(),
        })
    }

    /// Body of `"..."`; braces inside must balance and may contain quotes.
    fn quoted_body(&mut self) -> PResult<&'a str> {
        let start = self.pos;
        let mut depth = 0usize;
        while let Some(c) = self.bump() {
            match c {
                '{' => depth += 1,
                '}' => {
                    if depth == 0 {
                        return Err(Failure {
                            offset: self.pos - 1,
                            message: "unbalanced `}` in quoted value".into(),
                        });
                    }
                    depth -= 1;
                }
                '"' if depth == 0 => return Ok(&self.text[start..self.pos - 1]),
                _ => {}
            }
        }
        Err(Failure {
            offset: start - 1,
            message: "unterminated quoted value".into(),
        })
    }
}
