//! Inverted index with field-scoped postings, an entry store and a spelling
//! lexicon, published as immutable snapshots.

mod analysis;
mod build;
mod cell;
mod delta;
mod persist;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::bib::BibEntry;
use crate::taxonomy::TagClass;

pub use analysis::{
    clause_alternatives, field_terms, lexicon_words, normalize_tag_term, query_terms, FieldPrefix, FieldTerm,
    POSITION_GAP, VENUE_FIELDS,
};
pub use build::{build_index, build_index_with};
pub use cell::SnapshotCell;
pub use delta::{apply_delta, apply_delta_with, DeltaOutcome};
pub use persist::{read_index_file, write_index_file, FORMAT_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate citation keys: {}", .0.join(", "))]
    DuplicateKeys(Vec<String>),
    #[error("entries missing tag classes: {}", format_missing(.0))]
    Inadmissible(Vec<(String, Vec<TagClass>)>),
    #[error("invalid entries: {}", .0.join("; "))]
    InvalidEntries(Vec<String>),
    #[error("index file is corrupt: {0}")]
    Corrupt(String),
    #[error("unsupported index format version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_missing(items: &[(String, Vec<TagClass>)]) -> String {
    items
        .iter()
        .map(|(key, classes)| {
            let names: Vec<&str> = classes.iter().map(|c| c.as_str()).collect();
            format!("{key} ({})", names.join(", "))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Positions of one term in one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocPositions {
    pub doc: u32,
    pub positions: Vec<u32>,
}

/// Postings of one term, sorted by document id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PostingList {
    pub(crate) entries: Vec<DocPositions>,
}

impl PostingList {
    pub fn doc_freq(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DocPositions> {
        self.entries.iter()
    }

    pub fn get(&self, doc: u32) -> Option<&DocPositions> {
        self.entries.binary_search_by_key(&doc, |d| d.doc).ok().map(|i| &self.entries[i])
    }
}

/// A posting as returned by [`IndexSnapshot::lookup`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Posting {
    pub term: String,
    pub prefix: FieldPrefix,
    pub doc_id: u32,
    pub positions: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct FieldIndex {
    pub(crate) terms: BTreeMap<String, PostingList>,
    /// primary token count per document
    pub(crate) lengths: Vec<u32>,
}

impl FieldIndex {
    fn avg_length(&self) -> f64 {
        if self.lengths.is_empty() {
            return 0.0;
        }
        let total: u64 = self.lengths.iter().map(|&l| u64::from(l)).sum();
        total as f64 / self.lengths.len() as f64
    }
}

/// An immutable, searchable generation of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSnapshot {
    pub(crate) generation: u64,
    pub(crate) docs: Vec<BibEntry>,
    pub(crate) keys: HashMap<String, u32>,
    pub(crate) fields: Vec<FieldIndex>,
    pub(crate) avg_lengths: Vec<f64>,
    pub(crate) lexicon: BTreeMap<String, u32>,
}

impl IndexSnapshot {
    pub fn empty() -> Self {
        Self::assemble(0, Vec::new(), vec![FieldIndex::default(); FieldPrefix::ALL.len()], BTreeMap::new())
    }

    pub(crate) fn assemble(
        generation: u64,
        docs: Vec<BibEntry>,
        fields: Vec<FieldIndex>,
        lexicon: BTreeMap<String, u32>,
    ) -> Self {
        debug_assert_eq!(fields.len(), FieldPrefix::ALL.len());
        let keys = docs.iter().enumerate().map(|(i, e)| (e.citation_key.clone(), i as u32)).collect();
        let avg_lengths = fields.iter().map(FieldIndex::avg_length).collect();
        IndexSnapshot {
            generation,
            docs,
            keys,
            fields,
            avg_lengths,
            lexicon,
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// The same content published under another generation number.
    pub fn with_generation(mut self, generation: u64) -> Self {
        self.generation = generation;
        self
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn entries(&self) -> &[BibEntry] {
        &self.docs
    }

    pub fn entry(&self, doc: u32) -> Option<&BibEntry> {
        self.docs.get(doc as usize)
    }

    pub fn doc_id(&self, key: &str) -> Option<u32> {
        self.keys.get(key).copied()
    }

    pub fn entry_by_key(&self, key: &str) -> Option<&BibEntry> {
        self.doc_id(key).and_then(|d| self.entry(d))
    }

    pub(crate) fn field(&self, prefix: FieldPrefix) -> &FieldIndex {
        &self.fields[prefix.slot()]
    }

    pub fn postings(&self, prefix: FieldPrefix, term: &str) -> Option<&PostingList> {
        self.field(prefix).terms.get(term)
    }

    /// Postings of an already analyzed term, sorted by document id.
    pub fn lookup(&self, term: &str, prefix: FieldPrefix) -> Vec<Posting> {
        self.postings(prefix, term)
            .map(|list| {
                list.iter()
                    .map(|d| Posting {
                        term: term.to_string(),
                        prefix,
                        doc_id: d.doc,
                        positions: d.positions.clone(),
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn doc_freq(&self, prefix: FieldPrefix, term: &str) -> usize {
        self.postings(prefix, term).map_or(0, PostingList::doc_freq)
    }

    /// Terms of one field with their document frequencies, sorted by term.
    pub fn vocabulary(&self, prefix: FieldPrefix) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.field(prefix).terms.iter().map(|(t, l)| (t.as_str(), l.doc_freq()))
    }

    pub fn field_length(&self, prefix: FieldPrefix, doc: u32) -> u32 {
        self.field(prefix).lengths.get(doc as usize).copied().unwrap_or(0)
    }

    pub fn avg_field_length(&self, prefix: FieldPrefix) -> f64 {
        self.avg_lengths[prefix.slot()]
    }

    /// Documents containing a folded, unstemmed word anywhere.
    pub fn lexicon_freq(&self, word: &str) -> u32 {
        self.lexicon.get(word).copied().unwrap_or(0)
    }

    pub fn lexicon(&self) -> &BTreeMap<String, u32> {
        &self.lexicon
    }

    /// Every posting as `(prefix, term, citation key, positions)`, sorted.
    /// Independent of document ids, so two snapshots built in different
    /// ways can be compared.
    pub fn posting_content(&self) -> Vec<(FieldPrefix, String, String, Vec<u32>)> {
        let mut out = Vec::new();
        for prefix in FieldPrefix::ALL {
            for (term, list) in &self.field(prefix).terms {
                for d in list.iter() {
                    out.push((prefix, term.clone(), self.docs[d.doc as usize].citation_key.clone(), d.positions.clone()));
                }
            }
        }
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_snapshot() {
        let s = IndexSnapshot::empty();
        assert_eq!(s.doc_count(), 0);
        assert!(s.lookup("x", FieldPrefix::All).is_empty());
        assert_eq!(s.avg_field_length(FieldPrefix::Title), 0.0);
    }

    #[test]
    fn prefix_names_round_trip() {
        for p in FieldPrefix::ALL {
            assert_eq!(FieldPrefix::from_name(p.as_str()), Some(p));
        }
        assert_eq!(FieldPrefix::from_name("TITLE"), Some(FieldPrefix::Title));
        assert_eq!(FieldPrefix::from_name("foo"), None);
    }
}
