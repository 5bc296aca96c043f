use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::build::{analyze, append_docs, check_entries};
use super::{DocPositions, FieldIndex, IndexError, IndexSnapshot};
use crate::bib::{title_fingerprint, BibEntry};
use crate::exec::Execution;
use crate::importer::{replace_preprint, same_work};

/// Result of [`apply_delta`].
#[derive(Debug, Clone)]
pub struct DeltaOutcome {
    pub snapshot: IndexSnapshot,
    /// `(old key, new key)` for every indexed document an upsert replaced.
    pub replaced: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

pub fn apply_delta(snapshot: &IndexSnapshot, upserts: &[BibEntry], deletions: &[String]) -> Result<DeltaOutcome, IndexError> {
    apply_delta_with(snapshot, upserts, deletions, Execution::default())
}

/// Produces the next generation without rebuilding untouched documents.
///
/// Deletions run first. An upsert replaces every live document that shares
/// its citation key, DOI or title fingerprint; when the two are the same
/// work the result goes through [`replace_preprint`]. Deleting an unknown key
/// only warns. The input snapshot is left untouched.
pub fn apply_delta_with(
    snapshot: &IndexSnapshot,
    upserts: &[BibEntry],
    deletions: &[String],
    exec: Execution,
) -> Result<DeltaOutcome, IndexError> {
    check_entries(upserts)?;

    let mut warnings = Vec::new();
    let mut removed: BTreeSet<u32> = BTreeSet::new();
    for key in deletions {
        match snapshot.doc_id(key) {
            Some(d) => {
                removed.insert(d);
            }
            None => warnings.push(format!("delete of unknown key `{key}` ignored")),
        }
    }

    let mut by_doi: HashMap<String, Vec<u32>> = HashMap::new();
    let mut by_title: HashMap<String, Vec<u32>> = HashMap::new();
    if !upserts.is_empty() {
        let ids = exec.map(&snapshot.docs, |e| (e.doi(), title_fingerprint(e)));
        for (d, (doi, fp)) in ids.into_iter().enumerate() {
            let d = d as u32;
            if let Some(doi) = doi {
                by_doi.entry(doi).or_default().push(d);
            }
            if let Some(fp) = fp {
                by_title.entry(fp).or_default().push(d);
            }
        }
    }

    let mut replaced = Vec::new();
    let mut added: Vec<BibEntry> = Vec::new();
    for up in upserts {
        let mut merged = up.clone();
        if let Some(i) = added.iter().position(|a| a.citation_key == up.citation_key || same_work(a, up)) {
            let prev = added.remove(i);
            merged = combine(&prev, up);
        }
        let mut matches: BTreeSet<u32> = BTreeSet::new();
        matches.extend(snapshot.doc_id(&up.citation_key));
        if let Some(doi) = up.doi() {
            matches.extend(by_doi.get(&doi).into_iter().flatten());
        }
        if let Some(fp) = title_fingerprint(up) {
            matches.extend(by_title.get(&fp).into_iter().flatten());
        }
        for d in matches {
            if !removed.insert(d) {
                continue;
            }
            let old = &snapshot.docs[d as usize];
            merged = combine(old, &merged);
            replaced.push((old.citation_key.clone(), merged.citation_key.clone()));
        }
        added.push(merged);
    }

    let survivors: Vec<u32> = (0..snapshot.doc_count() as u32).filter(|d| !removed.contains(d)).collect();
    let mut remap = vec![u32::MAX; snapshot.doc_count()];
    for (new, &old) in survivors.iter().enumerate() {
        remap[old as usize] = new as u32;
    }

    let mut fields: Vec<FieldIndex> = exec.map(&snapshot.fields, |f| retain_docs(f, &survivors, &remap));
    let mut lexicon = snapshot.lexicon.clone();
    for &d in &removed {
        for word in super::lexicon_words(&snapshot.docs[d as usize]) {
            if let Some(n) = lexicon.get_mut(&word) {
                *n -= 1;
                if *n == 0 {
                    lexicon.remove(&word);
                }
            }
        }
    }

    let mut docs: Vec<BibEntry> = survivors.iter().map(|&d| snapshot.docs[d as usize].clone()).collect();
    let analyzed = exec.map(&added, analyze);
    append_docs(&mut fields, &mut lexicon, docs.len() as u32, analyzed);
    docs.extend(added);

    Ok(DeltaOutcome {
        snapshot: IndexSnapshot::assemble(snapshot.generation + 1, docs, fields, lexicon),
        replaced,
        warnings,
    })
}

fn combine(existing: &BibEntry, incoming: &BibEntry) -> BibEntry {
    if same_work(existing, incoming) {
        replace_preprint(existing, incoming).unwrap_or_else(|_| incoming.clone())
    } else {
        incoming.clone()
    }
}

fn retain_docs(field: &FieldIndex, survivors: &[u32], remap: &[u32]) -> FieldIndex {
    let terms: BTreeMap<String, super::PostingList> = field
        .terms
        .iter()
        .filter_map(|(term, list)| {
            let entries: Vec<DocPositions> = list
                .iter()
                .filter(|p| remap[p.doc as usize] != u32::MAX)
                .map(|p| DocPositions {
                    doc: remap[p.doc as usize],
                    positions: p.positions.clone(),
                })
                .collect();
            (!entries.is_empty()).then(|| (term.clone(), super::PostingList { entries }))
        })
        .collect();
    let lengths = survivors.iter().map(|&d| field.lengths[d as usize]).collect();
    FieldIndex { terms, lengths }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{build_index, FieldPrefix};

    fn tagged(key: &str, title: &str) -> BibEntry {
        BibEntry::new("article", key)
            .with_field("title", title)
            .with_field("year", "2020")
            .with_tag("area:medicine")
            .with_tag("tool:persistent homology")
            .with_tag("input:images")
    }

    #[test]
    fn empty_delta_bumps_generation() {
        let s = build_index(&[tagged("a", "Alpha"), tagged("b", "Beta")]).unwrap();
        let out = apply_delta(&s, &[], &[]).unwrap();
        assert_eq!(out.snapshot.generation(), s.generation() + 1);
        assert_eq!(out.snapshot.clone().with_generation(s.generation()), s);
    }

    #[test]
    fn insert_matches_rebuild() {
        let a = tagged("a", "Alpha shapes");
        let b = tagged("b", "Beta curves of shapes");
        let c = tagged("c", "Gamma shapes");
        let s = build_index(&[a.clone(), b.clone()]).unwrap();
        let out = apply_delta(&s, std::slice::from_ref(&c), &[]).unwrap();
        let fresh = build_index(&[a, b, c]).unwrap();
        assert_eq!(out.snapshot.posting_content(), fresh.posting_content());
        assert_eq!(out.snapshot.lexicon(), fresh.lexicon());
    }

    #[test]
    fn delete_matches_rebuild() {
        let a = tagged("a", "Alpha shapes");
        let b = tagged("b", "Beta curves of shapes");
        let c = tagged("c", "Gamma shapes");
        let s = build_index(&[a.clone(), b, c.clone()]).unwrap();
        let out = apply_delta(&s, &[], &["b".into(), "zzz".into()]).unwrap();
        assert_eq!(out.warnings.len(), 1);
        let fresh = build_index(&[a, c]).unwrap();
        assert_eq!(out.snapshot.posting_content(), fresh.posting_content());
        assert_eq!(out.snapshot.lexicon(), fresh.lexicon());
        assert_eq!(out.snapshot.doc_id("c"), Some(1));
        // the old generation still answers
        assert_eq!(s.doc_freq(FieldPrefix::Title, "beta"), 1);
        assert_eq!(out.snapshot.doc_freq(FieldPrefix::Title, "beta"), 0);
    }

    #[test]
    fn published_version_replaces_preprint() {
        let preprint = tagged("pre", "Shapes of data")
            .with_field("doi", "10.1/xyz")
            .with_field("url", "https://arxiv.org/abs/2001.00001")
            .with_field("eprint", "2001.00001");
        let published = tagged("pub", "Shapes of Data")
            .with_field("doi", "10.1/XYZ")
            .with_field("journal", "Journal of Shapes")
            .with_field("url", "https://publisher.example/shapes");
        let s = build_index(&[preprint, tagged("other", "Unrelated")]).unwrap();
        let out = apply_delta(&s, &[published], &[]).unwrap();
        assert_eq!(out.snapshot.doc_count(), 2);
        assert_eq!(out.replaced, [("pre".to_string(), "pub".to_string())]);
        let e = out.snapshot.entry_by_key("pub").unwrap();
        assert_eq!(e.field("preprint_url"), Some("https://arxiv.org/abs/2001.00001"));
        assert!(out.snapshot.entry_by_key("pre").is_none());
    }

    #[test]
    fn inadmissible_upsert_is_rejected() {
        let s = build_index(&[]).unwrap();
        let bad = BibEntry::new("article", "x").with_field("title", "T");
        assert!(matches!(apply_delta(&s, &[bad], &[]), Err(IndexError::Inadmissible(_))));
    }
}
