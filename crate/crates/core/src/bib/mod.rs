//! BibTeX entries: the canonical record type, parser and serializer.

mod parse;
mod serialize;

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::taxonomy::{parse_tag, Flavor, Tag, TagError};
use crate::textnorm::tokenize;

pub use parse::{parse_bibtex, parse_bibtex_bytes, ParseDiagnostic, ParseOutput, Severity};
pub use serialize::{serialize_bibtex, serialize_entry};

/// Name of the field that carries tags and flavors in BibTeX form.
pub const KEYWORDS_FIELD: &str = "keywords";

/// One bibliographic record.
///
/// Tags and flavors live outside `fields`; on disk they travel in the
/// `keywords` field as `class:path` and `flavor:name` items separated by
/// semicolons. Keyword items that are neither stay in `extra_keywords`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibEntry {
    pub entry_type: String,
    pub citation_key: String,
    pub fields: IndexMap<String, String>,
    #[serde(default)]
    pub tags: BTreeSet<Tag>,
    #[serde(default)]
    pub flavors: BTreeSet<Flavor>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_keywords: Vec<String>,
}

/// A keyword item that looked like a tag but did not parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordIssue {
    pub item: String,
    pub error: TagError,
}

impl BibEntry {
    pub fn new(entry_type: impl Into<String>, citation_key: impl Into<String>) -> Self {
        BibEntry {
            entry_type: entry_type.into().to_lowercase(),
            citation_key: citation_key.into(),
            fields: IndexMap::new(),
            tags: BTreeSet::new(),
            flavors: BTreeSet::new(),
            extra_keywords: Vec::new(),
        }
    }

    /// Builder-style field setter; the name is lowercased.
    pub fn with_field(mut self, name: &str, value: impl Into<String>) -> Self {
        self.set_field(name, value);
        self
    }

    pub fn with_tag(mut self, tag: &str) -> Self {
        self.tags.insert(parse_tag(tag).expect("valid tag literal"));
        self
    }

    pub fn with_flavor(mut self, flavor: Flavor) -> Self {
        self.flavors.insert(flavor);
        self
    }

    pub fn set_field(&mut self, name: &str, value: impl Into<String>) {
        self.fields.insert(name.to_lowercase(), value.into());
    }

    pub fn field(&self, name: &str) -> Option<&str> {
        self.fields.get(name).map(String::as_str)
    }

    pub fn has_field(&self, name: &str) -> bool {
        self.field(name).is_some_and(|v| !v.trim().is_empty())
    }

    pub fn title(&self) -> Option<&str> {
        self.field("title")
    }

    /// Author names split on ` and `.
    pub fn authors(&self) -> Vec<&str> {
        match self.field("author") {
            Some(a) => split_names(a),
            None => Vec::new(),
        }
    }

    /// The year, when it is a 4-digit number in 1800..=2100.
    pub fn year(&self) -> Option<u16> {
        self.field("year").and_then(parse_year)
    }

    /// Lowercased DOI with any resolver prefix removed.
    pub fn doi(&self) -> Option<String> {
        self.field("doi").map(normalize_doi).filter(|d| !d.is_empty())
    }

    /// Splits a `keywords` value into tags, flavors and leftovers.
    ///
    /// Items with a known class prefix that fail to parse are reported and
    /// kept as leftovers.
    pub fn absorb_keywords(&mut self, value: &str) -> Vec<KeywordIssue> {
        let mut issues = Vec::new();
        for item in value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            if let Some(name) = item.strip_prefix("flavor:") {
                if let Some(f) = Flavor::from_name(&name.trim().to_lowercase()) {
                    self.flavors.insert(f);
                    continue;
                }
            }
            match parse_tag(item) {
                Ok(tag) => {
                    self.tags.insert(tag);
                }
                Err(err) => {
                    if !matches!(err, TagError::UnknownClass(_)) && item.contains(':') {
                        issues.push(KeywordIssue {
                            item: item.to_string(),
                            error: err,
                        });
                    }
                    self.extra_keywords.push(item.to_string());
                }
            }
        }
        issues
    }

    /// The `keywords` value this entry serializes to, if any.
    pub fn keywords_value(&self) -> Option<String> {
        let items: Vec<String> = self
            .tags
            .iter()
            .map(Tag::to_string)
            .chain(self.flavors.iter().map(|f| format!("flavor:{f}")))
            .chain(self.extra_keywords.iter().cloned())
            .collect();
        if items.is_empty() {
            None
        } else {
            Some(items.join("; "))
        }
    }

    /// Violations of the record invariants, as human-readable messages.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !valid_key(&self.citation_key) {
            problems.push(format!("invalid citation key `{}`", self.citation_key));
        }
        if let Some(a) = self.field("author") {
            let names = split_names(a);
            if names.is_empty() || names.iter().any(|n| n.trim().is_empty()) {
                problems.push("author list contains an empty name".to_string());
            }
        }
        if let Some(y) = self.field("year") {
            if parse_year(y).is_none() {
                problems.push(format!("year `{y}` is not a 4-digit year in 1800..=2100"));
            }
        }
        for (name, value) in &self.fields {
            if name.is_empty() || !name.chars().all(parse::is_ident_char) || *name != name.to_lowercase() {
                problems.push(format!("invalid field name `{name}`"));
            } else if name == KEYWORDS_FIELD {
                problems.push("keywords must be held as tags, flavors or extra keywords".to_string());
            }
            if !balanced(value) {
                problems.push(format!("field `{name}` has unbalanced braces"));
            }
        }
        for kw in &self.extra_keywords {
            if kw.is_empty() || kw.contains(';') || kw.trim() != kw || !balanced(kw) {
                problems.push(format!("keyword `{kw}` cannot be written back"));
            }
        }
        problems
    }
}

pub(crate) fn split_names(value: &str) -> Vec<&str> {
    // words at brace depth 0; a bare `and` word separates names
    let mut words: Vec<(usize, usize)> = Vec::new();
    let mut depth = 0i32;
    let mut start: Option<usize> = None;
    for (i, c) in value.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth <= 0 {
            if let Some(s) = start.take() {
                words.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        words.push((s, value.len()));
    }
    if words.is_empty() {
        return Vec::new();
    }
    let mut names = Vec::new();
    let mut group: Option<(usize, usize)> = None;
    for (s, e) in words {
        if value[s..e].eq_ignore_ascii_case("and") {
            names.push(group.take().map_or("", |(gs, ge)| &value[gs..ge]));
        } else {
            group = Some(group.map_or((s, e), |(gs, _)| (gs, e)));
        }
    }
    names.push(group.map_or("", |(gs, ge)| &value[gs..ge]));
    names
}

pub(crate) fn parse_year(value: &str) -> Option<u16> {
    let v = value.trim().trim_matches(|c| c == '{' || c == '}');
    if v.len() != 4 || !v.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let y: u16 = v.parse().ok()?;
    (1800..=2100).contains(&y).then_some(y)
}

pub fn normalize_doi(raw: &str) -> String {
    let mut d = raw.trim().to_lowercase();
    for prefix in ["https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/", "doi:"] {
        if let Some(rest) = d.strip_prefix(prefix) {
            d = rest.trim().to_string();
        }
    }
    d
}

pub(crate) fn balanced(value: &str) -> bool {
    let mut depth = 0i32;
    for c in value.chars() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

pub(crate) fn valid_key(key: &str) -> bool {
    if key.is_empty() || key.chars().any(char::is_whitespace) {
        return false;
    }
    balanced(key) && !key.contains([',', '(', ')', '"', '=', '#', '@'])
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FingerprintError {
    #[error("entry `{0}` has neither a doi nor a title")]
    NoIdentity(String),
}

/// Folded title words joined by spaces; `None` when the title has no words.
pub fn folded_title(entry: &BibEntry) -> Option<String> {
    let title = entry.title()?;
    let words: Vec<String> = tokenize(title).into_iter().filter(|t| !t.joined).map(|t| t.folded).collect();
    (!words.is_empty()).then(|| words.join(" "))
}

/// Title-and-year identity, independent of the DOI.
pub fn title_fingerprint(entry: &BibEntry) -> Option<String> {
    let title = folded_title(entry)?;
    let year = entry.field("year").map(str::trim).unwrap_or("");
    Some(format!("{title}#{year}"))
}

/// Identity used for deduplication: the normalized DOI when present,
/// otherwise the folded title followed by `#` and the year.
pub fn entry_fingerprint(entry: &BibEntry) -> Result<String, FingerprintError> {
    if let Some(doi) = entry.doi() {
        return Ok(doi);
    }
    title_fingerprint(entry).ok_or_else(|| FingerprintError::NoIdentity(entry.citation_key.clone()))
}
