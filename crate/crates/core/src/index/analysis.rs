//! How each field of an entry becomes index terms, and how query text for a
//! field becomes lookup terms. Both sides go through the same functions.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bib::{normalize_doi, split_names, BibEntry};
use crate::textnorm::{fold, stem, tokenize, Token};

/// Position gap between separate values of one field (two authors, title and
/// abstract in `all`) so phrases never span them.
pub const POSITION_GAP: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldPrefix {
    Title,
    Author,
    Tag,
    Abstract,
    Year,
    Venue,
    Doi,
    All,
}

impl FieldPrefix {
    pub const ALL: [FieldPrefix; 8] = [
        FieldPrefix::Title,
        FieldPrefix::Author,
        FieldPrefix::Tag,
        FieldPrefix::Abstract,
        FieldPrefix::Year,
        FieldPrefix::Venue,
        FieldPrefix::Doi,
        FieldPrefix::All,
    ];

    /// Fields that `all` consults besides its own free-text mirror.
    pub(crate) const STRUCTURED: [FieldPrefix; 5] = [
        FieldPrefix::Author,
        FieldPrefix::Venue,
        FieldPrefix::Tag,
        FieldPrefix::Year,
        FieldPrefix::Doi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FieldPrefix::Title => "title",
            FieldPrefix::Author => "author",
            FieldPrefix::Tag => "tag",
            FieldPrefix::Abstract => "abstract",
            FieldPrefix::Year => "year",
            FieldPrefix::Venue => "venue",
            FieldPrefix::Doi => "doi",
            FieldPrefix::All => "all",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        FieldPrefix::ALL.into_iter().find(|p| p.as_str().eq_ignore_ascii_case(name))
    }

    pub(crate) fn slot(self) -> usize {
        self as usize
    }

    /// Title and abstract: stemmed, mirrored into `all`.
    pub fn is_free_text(self) -> bool {
        matches!(self, FieldPrefix::Title | FieldPrefix::Abstract)
    }

    /// Fields whose whole value is one exact term.
    pub fn is_keyword(self) -> bool {
        matches!(self, FieldPrefix::Tag | FieldPrefix::Year | FieldPrefix::Doi)
    }
}

impl fmt::Display for FieldPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldPrefix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FieldPrefix::from_name(s).ok_or_else(|| format!("unknown field `{s}`"))
    }
}

/// A term occurrence produced for the index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldTerm {
    pub term: String,
    pub position: u32,
    /// Counts toward the field length (false for joined hyphen forms).
    pub primary: bool,
}

pub const VENUE_FIELDS: [&str; 2] = ["journal", "booktitle"];

fn text_terms(tokens: Vec<Token>, base: u32, stemmed: bool, out: &mut Vec<FieldTerm>) -> u32 {
    let mut next = base;
    for t in tokens {
        let term = if stemmed { stem(&t.folded) } else { t.folded };
        next = next.max(base + t.position + 1);
        out.push(FieldTerm {
            term,
            position: base + t.position,
            primary: !t.joined,
        });
    }
    next
}

fn multi_value_terms<'a>(values: impl IntoIterator<Item = &'a str>, stemmed: bool) -> Vec<FieldTerm> {
    let mut out = Vec::new();
    let mut base = 0;
    for value in values {
        let end = text_terms(tokenize(value), base, stemmed, &mut out);
        if end > base {
            base = end + POSITION_GAP;
        }
    }
    out
}

/// Normalizes a tag query or tag path: folded segments joined by `:`.
pub fn normalize_tag_term(text: &str) -> String {
    text.split(':').map(|s| fold(s.trim())).collect::<Vec<_>>().join(":")
}

/// Index terms of one field of `entry`.
pub fn field_terms(entry: &BibEntry, prefix: FieldPrefix) -> Vec<FieldTerm> {
    match prefix {
        FieldPrefix::Title => multi_value_terms(entry.title(), true),
        FieldPrefix::Abstract => multi_value_terms(entry.field("abstract"), true),
        FieldPrefix::All => multi_value_terms(entry.title().into_iter().chain(entry.field("abstract")), true),
        FieldPrefix::Author => multi_value_terms(entry.authors(), false),
        FieldPrefix::Venue => multi_value_terms(VENUE_FIELDS.iter().filter_map(|f| entry.field(f)), false),
        FieldPrefix::Tag => {
            let mut terms: BTreeSet<String> = BTreeSet::new();
            for tag in &entry.tags {
                for prefix in tag.ancestors() {
                    let path = prefix.join(":");
                    terms.insert(format!("{}:{path}", tag.class()));
                    terms.insert(path);
                }
                terms.extend(tag.path().iter().cloned());
            }
            terms
                .into_iter()
                .enumerate()
                .map(|(i, term)| FieldTerm {
                    term,
                    position: i as u32,
                    primary: true,
                })
                .collect()
        }
        FieldPrefix::Year => entry
            .year()
            .map(|y| FieldTerm {
                term: y.to_string(),
                position: 0,
                primary: true,
            })
            .into_iter()
            .collect(),
        FieldPrefix::Doi => entry
            .doi()
            .map(|d| FieldTerm {
                term: d,
                position: 0,
                primary: true,
            })
            .into_iter()
            .collect(),
    }
}

/// Folded, unstemmed words that feed spelling suggestions.
pub fn lexicon_words(entry: &BibEntry) -> BTreeSet<String> {
    let mut words = BTreeSet::new();
    let mut add = |text: &str| words.extend(tokenize(text).into_iter().map(|t| t.folded));
    if let Some(t) = entry.title() {
        add(t);
    }
    if let Some(a) = entry.field("abstract") {
        add(a);
    }
    for name in split_names(entry.field("author").unwrap_or("")) {
        add(name);
    }
    for f in VENUE_FIELDS {
        if let Some(v) = entry.field(f) {
            add(v);
        }
    }
    for tag in &entry.tags {
        for seg in tag.path() {
            add(seg);
        }
    }
    words
}

/// Lookup terms for query `text` scoped to a concrete field, in order. An
/// empty result means the text has nothing searchable for that field.
pub fn query_terms(prefix: FieldPrefix, text: &str) -> Vec<String> {
    match prefix {
        FieldPrefix::Title | FieldPrefix::Abstract | FieldPrefix::All => {
            tokenize(text).into_iter().filter(|t| !t.joined).map(|t| stem(&t.folded)).collect()
        }
        FieldPrefix::Author | FieldPrefix::Venue => {
            tokenize(text).into_iter().filter(|t| !t.joined).map(|t| t.folded).collect()
        }
        FieldPrefix::Tag => {
            let t = normalize_tag_term(text);
            if t.split(':').any(str::is_empty) {
                Vec::new()
            } else {
                vec![t]
            }
        }
        FieldPrefix::Year => {
            let t = text.trim();
            if !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()) {
                vec![t.to_string()]
            } else {
                Vec::new()
            }
        }
        FieldPrefix::Doi => {
            let d = normalize_doi(text);
            if d.starts_with("10.") {
                vec![d]
            } else {
                Vec::new()
            }
        }
    }
}

/// The (field, term sequence) alternatives a clause on `prefix` matches
/// against. `all` expands to its free-text mirror plus every structured field.
pub fn clause_alternatives(prefix: FieldPrefix, text: &str) -> Vec<(FieldPrefix, Vec<String>)> {
    let fields: Vec<FieldPrefix> = if prefix == FieldPrefix::All {
        std::iter::once(FieldPrefix::All).chain(FieldPrefix::STRUCTURED).collect()
    } else {
        vec![prefix]
    };
    fields
        .into_iter()
        .map(|f| (f, query_terms(f, text)))
        .filter(|(_, terms)| !terms.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms(e: &BibEntry, p: FieldPrefix) -> Vec<(String, u32)> {
        field_terms(e, p).into_iter().map(|t| (t.term, t.position)).collect()
    }

    #[test]
    fn title_is_stemmed_and_mirrored() {
        let e = BibEntry::new("article", "k")
            .with_field("title", "A General Descriptor")
            .with_field("abstract", "Graphs");
        assert_eq!(terms(&e, FieldPrefix::Title), [("a".into(), 0), ("gener".into(), 1), ("descriptor".into(), 2)]);
        let all = terms(&e, FieldPrefix::All);
        assert_eq!(all.last().unwrap(), &("graph".to_string(), 3 + POSITION_GAP));
    }

    #[test]
    fn authors_are_folded_not_stemmed() {
        let e = BibEntry::new("article", "k").with_field("author", "Dłotko, Paweł and Reading, Graphs");
        let t = terms(&e, FieldPrefix::Author);
        assert_eq!(t[0], ("dlotko".into(), 0));
        assert_eq!(t[1], ("pawel".into(), 1));
        assert_eq!(t[2], ("reading".into(), 2 + POSITION_GAP));
        assert_eq!(t[3], ("graphs".into(), 3 + POSITION_GAP));
    }

    #[test]
    fn tags_expand_to_prefixes() {
        let e = BibEntry::new("article", "k").with_tag("tool:graphs:directed");
        let t: Vec<String> = field_terms(&e, FieldPrefix::Tag).into_iter().map(|t| t.term).collect();
        assert_eq!(t, ["directed", "graphs", "graphs:directed", "tool:graphs", "tool:graphs:directed"]);
    }

    #[test]
    fn year_and_doi_exact() {
        let e = BibEntry::new("article", "k").with_field("year", "2020").with_field("doi", "10.1/ABC");
        assert_eq!(terms(&e, FieldPrefix::Year), [("2020".into(), 0)]);
        assert_eq!(terms(&e, FieldPrefix::Doi), [("10.1/abc".into(), 0)]);
        let bad = BibEntry::new("article", "k").with_field("year", "n.d.");
        assert!(terms(&bad, FieldPrefix::Year).is_empty());
    }

    #[test]
    fn query_side() {
        assert_eq!(query_terms(FieldPrefix::Title, "Generalities"), ["gener"]);
        assert_eq!(query_terms(FieldPrefix::Author, "Paweł"), ["pawel"]);
        assert_eq!(query_terms(FieldPrefix::All, "high-dimensional"), ["high", "dimen"]);
        assert_eq!(query_terms(FieldPrefix::Tag, "Graphs:Directed"), ["graphs:directed"]);
        assert!(query_terms(FieldPrefix::Tag, "graphs:").is_empty());
        let alts = clause_alternatives(FieldPrefix::All, "pawel");
        let fields: Vec<FieldPrefix> = alts.iter().map(|a| a.0).collect();
        assert_eq!(fields, [FieldPrefix::All, FieldPrefix::Author, FieldPrefix::Venue, FieldPrefix::Tag]);
        let alts = clause_alternatives(FieldPrefix::All, "2020");
        assert!(alts.iter().any(|a| a.0 == FieldPrefix::Year));
        assert!(query_terms(FieldPrefix::Doi, "graph").is_empty());
    }

    #[test]
    fn lexicon_is_unstemmed() {
        let e = BibEntry::new("article", "k").with_field("title", "Simplicial homology").with_tag("tool:persistent homology");
        let w = lexicon_words(&e);
        assert!(w.contains("simplicial") && w.contains("homology") && w.contains("persistent"));
    }
}
