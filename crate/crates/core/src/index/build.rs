use std::collections::{BTreeMap, BTreeSet};

use super::{field_terms, lexicon_words, DocPositions, FieldIndex, FieldPrefix, IndexError, IndexSnapshot};
use crate::bib::BibEntry;
use crate::exec::Execution;
use crate::taxonomy::validate_entry;

/// Terms of one document, grouped per field.
pub(crate) struct DocTerms {
    /// per field slot: term -> sorted positions, and the primary token count
    pub(crate) fields: Vec<(BTreeMap<String, Vec<u32>>, u32)>,
    pub(crate) lexicon: BTreeSet<String>,
}

pub(crate) fn analyze(entry: &BibEntry) -> DocTerms {
    let fields = FieldPrefix::ALL
        .into_iter()
        .map(|prefix| {
            let mut terms: BTreeMap<String, Vec<u32>> = BTreeMap::new();
            let mut length = 0;
            for t in field_terms(entry, prefix) {
                if t.primary {
                    length += 1;
                }
                terms.entry(t.term).or_default().push(t.position);
            }
            for positions in terms.values_mut() {
                positions.sort_unstable();
                positions.dedup();
            }
            (terms, length)
        })
        .collect();
    DocTerms {
        fields,
        lexicon: lexicon_words(entry),
    }
}

/// Appends analyzed documents, numbered from `first_doc`, to the field
/// indexes and lexicon.
pub(crate) fn append_docs(
    fields: &mut [FieldIndex],
    lexicon: &mut BTreeMap<String, u32>,
    first_doc: u32,
    analyzed: Vec<DocTerms>,
) {
    for (offset, doc_terms) in analyzed.into_iter().enumerate() {
        let doc = first_doc + offset as u32;
        for (field, (terms, length)) in fields.iter_mut().zip(doc_terms.fields) {
            field.lengths.push(length);
            for (term, positions) in terms {
                field.terms.entry(term).or_default().entries.push(DocPositions { doc, positions });
            }
        }
        for word in doc_terms.lexicon {
            *lexicon.entry(word).or_default() += 1;
        }
    }
}

/// Checks the preconditions shared by build and delta.
pub(crate) fn check_entries<'a>(entries: impl IntoIterator<Item = &'a BibEntry>) -> Result<(), IndexError> {
    let mut inadmissible = Vec::new();
    let mut invalid = Vec::new();
    for e in entries {
        let problems = e.check();
        if !problems.is_empty() {
            invalid.push(format!("{}: {}", e.citation_key, problems.join(", ")));
        }
        let report = validate_entry(e);
        if !report.is_admissible_for_index {
            inadmissible.push((e.citation_key.clone(), report.missing_classes.into_iter().collect()));
        }
    }
    if !invalid.is_empty() {
        return Err(IndexError::InvalidEntries(invalid));
    }
    if !inadmissible.is_empty() {
        return Err(IndexError::Inadmissible(inadmissible));
    }
    Ok(())
}

pub fn build_index(corpus: &[BibEntry]) -> Result<IndexSnapshot, IndexError> {
    build_index_with(corpus, Execution::default())
}

/// Builds generation 1 of an index over `corpus`. Document ids follow the
/// corpus order.
pub fn build_index_with(corpus: &[BibEntry], exec: Execution) -> Result<IndexSnapshot, IndexError> {
    let mut seen = BTreeSet::new();
    let duplicates: BTreeSet<String> =
        corpus.iter().filter(|e| !seen.insert(e.citation_key.as_str())).map(|e| e.citation_key.clone()).collect();
    if !duplicates.is_empty() {
        return Err(IndexError::DuplicateKeys(duplicates.into_iter().collect()));
    }
    check_entries(corpus)?;

    let analyzed = exec.map(corpus, analyze);
    let mut fields = vec![FieldIndex::default(); FieldPrefix::ALL.len()];
    let mut lexicon = BTreeMap::new();
    append_docs(&mut fields, &mut lexicon, 0, analyzed);
    Ok(IndexSnapshot::assemble(1, corpus.to_vec(), fields, lexicon))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged(key: &str) -> BibEntry {
        BibEntry::new("article", key)
            .with_tag("area:medicine")
            .with_tag("tool:graphs:directed")
            .with_tag("input:time series")
    }

    #[test]
    fn empty_corpus() {
        let s = build_index(&[]).unwrap();
        assert_eq!(s.doc_count(), 0);
        assert_eq!(s.generation(), 1);
    }

    #[test]
    fn general_under_title_and_all() {
        let s = build_index(&[tagged("k").with_field("title", "A General Descriptor")]).unwrap();
        assert_eq!(s.lookup("gener", FieldPrefix::Title).len(), 1);
        assert_eq!(s.lookup("gener", FieldPrefix::All).len(), 1);
        assert!(s.lookup("gener", FieldPrefix::Abstract).is_empty());
    }

    #[test]
    fn transliterated_author() {
        let s = build_index(&[tagged("k").with_field("author", "D., Paweł")]).unwrap();
        let hits = s.lookup("pawel", FieldPrefix::Author);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].doc_id, 0);
    }

    #[test]
    fn tag_prefixes() {
        let s = build_index(&[tagged("k")]).unwrap();
        for term in ["graphs", "graphs:directed", "tool:graphs", "directed"] {
            assert_eq!(s.doc_freq(FieldPrefix::Tag, term), 1, "{term}");
        }
    }

    #[test]
    fn rejects_duplicates_and_missing_classes() {
        let err = build_index(&[tagged("a"), tagged("b"), tagged("a")]).unwrap_err();
        assert!(matches!(err, IndexError::DuplicateKeys(ref k) if k == &["a".to_string()]));
        let bare = BibEntry::new("article", "x").with_tag("area:medicine");
        let err = build_index(&[tagged("a"), bare]).unwrap_err();
        assert!(err.to_string().contains("x (tool, input)"), "{err}");
    }

    #[test]
    fn execution_modes_agree() {
        let corpus: Vec<BibEntry> = (0..50)
            .map(|i| tagged(&format!("k{i}")).with_field("title", format!("Topological word{i} of data number {}", i % 7)))
            .collect();
        let a = build_index_with(&corpus, Execution::Sequential).unwrap();
        let b = build_index(&corpus).unwrap();
        assert_eq!(a, b);
    }
}
