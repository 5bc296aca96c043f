//! Tag classes, flavors, the per-class completeness rule, the tag hierarchy
//! and corpus statistics.

mod stats;
mod tree;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bib::BibEntry;
use crate::textnorm::fold;

pub use stats::{corpus_statistics, corpus_statistics_with, CorpusStats};
pub use tree::{tag_tree, TagNode, TagTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagClass {
    /// Area of applications.
    Area,
    /// Mathematical tools used.
    Tool,
    /// Input data type.
    Input,
}

impl TagClass {
    pub const ALL: [TagClass; 3] = [TagClass::Area, TagClass::Tool, TagClass::Input];

    pub fn as_str(self) -> &'static str {
        match self {
            TagClass::Area => "area",
            TagClass::Tool => "tool",
            TagClass::Input => "input",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "area" => Some(TagClass::Area),
            "tool" => Some(TagClass::Tool),
            "input" => Some(TagClass::Input),
            _ => None,
        }
    }
}

impl fmt::Display for TagClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Innovate,
    Confirm,
}

impl Flavor {
    pub const ALL: [Flavor; 2] = [Flavor::Innovate, Flavor::Confirm];

    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Innovate => "innovate",
            Flavor::Confirm => "confirm",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "innovate" => Some(Flavor::Innovate),
            "confirm" => Some(Flavor::Confirm),
            _ => None,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TagError {
    #[error("empty tag")]
    Empty,
    #[error("unknown tag class `{0}` (expected area, tool or input)")]
    UnknownClass(String),
    #[error("tag `{0}` has no path after its class")]
    MissingPath(String),
    #[error("tag `{0}` contains an empty segment")]
    EmptySegment(String),
    #[error("invalid tag segment `{0}`")]
    InvalidSegment(String),
}

/// A classified hierarchical label such as `tool:graphs:directed`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    class: TagClass,
    path: Vec<String>,
}

fn valid_segment(seg: &str) -> bool {
    let mut bytes = seg.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_lowercase() || b.is_ascii_digit() => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || matches!(b, b' ' | b'_' | b'-'))
}

impl Tag {
    /// Builds a tag from already normalized segments.
    pub fn new<S: Into<String>>(class: TagClass, path: impl IntoIterator<Item = S>) -> Result<Self, TagError> {
        let path: Vec<String> = path.into_iter().map(Into::into).collect();
        if path.is_empty() {
            return Err(TagError::MissingPath(class.to_string()));
        }
        for seg in &path {
            if seg.is_empty() {
                return Err(TagError::EmptySegment(path.join(":")));
            }
            if !valid_segment(seg) {
                return Err(TagError::InvalidSegment(seg.clone()));
            }
        }
        Ok(Tag { class, path })
    }

    pub fn class(&self) -> TagClass {
        self.class
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }

    /// Path segments joined with `:` (no class), e.g. `graphs:directed`.
    pub fn path_string(&self) -> String {
        self.path.join(":")
    }

    /// Every prefix of the path, shortest first.
    pub fn ancestors(&self) -> impl Iterator<Item = &[String]> + '_ {
        (1..=self.path.len()).map(move |n| &self.path[..n])
    }

    pub fn is_ancestor_of(&self, other: &Tag) -> bool {
        self.class == other.class && other.path.len() > self.path.len() && other.path.starts_with(&self.path)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.class)?;
        for seg in &self.path {
            write!(f, ":{seg}")?;
        }
        Ok(())
    }
}

impl FromStr for Tag {
    type Err = TagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_tag(s)
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_tag(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses the canonical `class:seg1:seg2` form. Whitespace around segments is
/// trimmed and segments are folded (lowercase, diacritics removed).
pub fn parse_tag(raw: &str) -> Result<Tag, TagError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(TagError::Empty);
    }
    let mut parts = raw.split(':');
    let class_name = fold(parts.next().unwrap_or_default().trim());
    let class = TagClass::from_name(&class_name).ok_or_else(|| TagError::UnknownClass(class_name.clone()))?;
    let mut path = Vec::new();
    for part in parts {
        let seg = fold(part.trim());
        if seg.is_empty() {
            return Err(TagError::EmptySegment(raw.to_string()));
        }
        path.push(seg);
    }
    Tag::new(class, path)
}

/// Outcome of checking one entry against the tag-class completeness rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub key: String,
    pub missing_classes: BTreeSet<TagClass>,
    pub warnings: Vec<String>,
    pub is_admissible_for_index: bool,
}

/// Every entry needs at least one tag of each class. Flavors are optional
/// and never affect the outcome.
pub fn validate_entry(entry: &BibEntry) -> ValidationReport {
    let missing_classes: BTreeSet<TagClass> = TagClass::ALL
        .into_iter()
        .filter(|class| !entry.tags.iter().any(|t| t.class() == *class))
        .collect();
    let mut warnings = Vec::new();
    for kw in &entry.extra_keywords {
        match kw.split_once(':') {
            Some((prefix, _)) => warnings.push(format!("unrecognized keyword class `{}` in `{kw}`", prefix.trim())),
            None => warnings.push(format!("keyword `{kw}` is not a tag")),
        }
    }
    ValidationReport {
        key: entry.citation_key.clone(),
        is_admissible_for_index: missing_classes.is_empty(),
        missing_classes,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(tags: &[&str]) -> BibEntry {
        let mut e = BibEntry::new("article", "k");
        for t in tags {
            e.tags.insert(parse_tag(t).unwrap());
        }
        e
    }

    #[test]
    fn parse_hierarchical() {
        let t = parse_tag("area:medicine:neurology:epilepsy").unwrap();
        assert_eq!(t.class(), TagClass::Area);
        assert_eq!(t.path(), ["medicine", "neurology", "epilepsy"]);
        assert_eq!(t.to_string(), "area:medicine:neurology:epilepsy");
        assert_eq!(t.path_string(), "medicine:neurology:epilepsy");
        let anc: Vec<String> = t.ancestors().map(|a| a.join(":")).collect();
        assert_eq!(anc, ["medicine", "medicine:neurology", "medicine:neurology:epilepsy"]);
    }

    #[test]
    fn parse_with_spaces_and_case() {
        let t = parse_tag("  Input: Point Cloud ").unwrap();
        assert_eq!(t.class(), TagClass::Input);
        assert_eq!(t.path(), ["point cloud"]);
        assert_eq!(parse_tag("tool:Poincaré duality").unwrap().path(), ["poincare duality"]);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_tag("flavor:innovate"), Err(TagError::UnknownClass("flavor".into())));
        assert_eq!(parse_tag(""), Err(TagError::Empty));
        assert!(matches!(parse_tag("area::x"), Err(TagError::EmptySegment(_))));
        assert!(matches!(parse_tag("area"), Err(TagError::MissingPath(_))));
        assert!(matches!(parse_tag("tool:-x"), Err(TagError::InvalidSegment(_))));
        assert!(matches!(parse_tag("tool:a/b"), Err(TagError::InvalidSegment(_))));
    }

    #[test]
    fn complete_entry_is_admissible() {
        let r = validate_entry(&entry(&["area:medicine", "tool:persistent homology", "input:time series"]));
        assert!(r.missing_classes.is_empty());
        assert!(r.is_admissible_for_index);
    }

    #[test]
    fn missing_input_class() {
        let r = validate_entry(&entry(&["area:medicine", "tool:persistent homology"]));
        assert_eq!(r.missing_classes, BTreeSet::from([TagClass::Input]));
        assert!(!r.is_admissible_for_index);
    }

    #[test]
    fn flavors_do_not_matter() {
        let mut e = entry(&["area:medicine", "tool:persistent homology", "input:time series"]);
        e.flavors.insert(Flavor::Innovate);
        let r = validate_entry(&e);
        assert!(r.is_admissible_for_index);
        assert!(r.warnings.is_empty());
        let bare = validate_entry(&BibEntry::new("misc", "x"));
        assert_eq!(bare.missing_classes.len(), 3);
    }

    #[test]
    fn unknown_keywords_warn() {
        let mut e = entry(&["area:a", "tool:b", "input:c"]);
        e.extra_keywords.push("method:x".into());
        let r = validate_entry(&e);
        assert!(r.is_admissible_for_index);
        assert_eq!(r.warnings.len(), 1);
    }
}
