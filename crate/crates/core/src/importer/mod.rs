//! One-way synchronization from a bibliographic source into a BibTeX corpus
//! file, with admission rules, deduplication and preprint replacement.

mod policy;
mod source;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bib::{parse_bibtex, serialize_bibtex, BibEntry};

pub use policy::{
    admissibility_filter, admissibility_filter_with, has_venue, replace_preprint, replace_preprint_with, same_work,
    Admission, OaPolicy, ReplaceError, DEFAULT_PREPRINT_HOSTS,
};
pub use source::{map_record, FixtureSource, Page, SourceClient, SourceError};

pub const LOCK_FILE: &str = "corpus.lock";
pub const QUARANTINE_FILE: &str = "quarantine.bib";

#[derive(Debug, thiserror::Error)]
pub enum ImportError {
    #[error("another import holds {}", .0.display())]
    Locked(PathBuf),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error("{}: {message}", path.display())]
    Corpus { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Accepted,
    Quarantined,
    Deduplicated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryDecision {
    pub key: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Counts satisfy `fetched = accepted + quarantined + deduplicated`;
/// `replaced` counts accepted entries that superseded another record.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImportReport {
    pub library_version: String,
    pub fetched: usize,
    pub accepted: usize,
    pub quarantined: usize,
    pub replaced: usize,
    pub deduplicated: usize,
    pub decisions: Vec<EntryDecision>,
}

impl ImportReport {
    fn decide(&mut self, key: &str, outcome: Outcome, reason: Option<String>, warnings: Vec<String>) {
        match outcome {
            Outcome::Accepted => self.accepted += 1,
            Outcome::Quarantined => self.quarantined += 1,
            Outcome::Deduplicated => self.deduplicated += 1,
        }
        self.decisions.push(EntryDecision {
            key: key.to_string(),
            outcome,
            reason,
            warnings,
        });
    }
}

#[derive(Debug, Clone, Default)]
pub struct SyncOptions {
    pub oa_policy: OaPolicy,
}

struct CorpusLock(PathBuf);

impl CorpusLock {
    fn acquire(path: PathBuf) -> Result<Self, ImportError> {
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(CorpusLock(path)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(ImportError::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for CorpusLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn sibling(corpus: &Path, name: &str) -> PathBuf {
    corpus.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).join(name)
}

pub fn sync(client: &dyn SourceClient, corpus_path: &Path) -> Result<ImportReport, ImportError> {
    sync_with(client, corpus_path, &SyncOptions::default())
}

/// Pulls every page from `client` and merges the admissible records into
/// the corpus at `corpus_path`.
///
/// Nothing is written unless all pages were fetched. Records that describe
/// the same work collapse into one entry, a published version superseding
/// its preprint. Entries already in the corpus are kept unless a fetched
/// record replaces them. Mappable records that fail admission are written to
/// a `quarantine.bib` next to the corpus.
pub fn sync_with(client: &dyn SourceClient, corpus_path: &Path, options: &SyncOptions) -> Result<ImportReport, ImportError> {
    let _lock = CorpusLock::acquire(sibling(corpus_path, LOCK_FILE))?;
    let policy = &options.oa_policy;

    let old_bytes = match fs::read(corpus_path) {
        Ok(b) => Some(b),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let mut existing = match &old_bytes {
        Some(bytes) => {
            let text = std::str::from_utf8(bytes).map_err(|_| ImportError::Corpus {
                path: corpus_path.to_path_buf(),
                message: "corpus is not UTF-8".into(),
            })?;
            let parsed = parse_bibtex(text);
            if let Some(err) = parsed.errors().next() {
                return Err(ImportError::Corpus {
                    path: corpus_path.to_path_buf(),
                    message: err.to_string(),
                });
            }
            parsed.entries
        }
        None => Vec::new(),
    };

    let mut report = ImportReport {
        library_version: client.library_version()?,
        ..Default::default()
    };
    let mut records = Vec::new();
    let mut cursor: Option<String> = None;
    let mut seen_cursors = std::collections::HashSet::new();
    loop {
        let page = client.fetch_page(cursor.as_deref())?;
        records.extend(page.records);
        match page.next {
            Some(next) if seen_cursors.insert(next.clone()) => cursor = Some(next),
            Some(next) => return Err(SourceError::Other(format!("pagination loops at cursor `{next}`")).into()),
            None => break,
        }
    }
    report.fetched = records.len();

    let mut quarantine = Vec::new();
    let mut candidates: Vec<(BibEntry, Vec<String>)> = Vec::new();
    for (i, record) in records.iter().enumerate() {
        match map_record(record) {
            Err(reason) => {
                let key = record.get("key").and_then(|k| k.as_str()).map_or_else(|| format!("record #{i}"), str::to_string);
                report.decide(&key, Outcome::Quarantined, Some(format!("malformed record: {reason}")), Vec::new());
            }
            Ok(entry) => match admissibility_filter_with(&entry, policy) {
                Admission::Quarantine { reason } => {
                    report.decide(&entry.citation_key, Outcome::Quarantined, Some(reason), Vec::new());
                    quarantine.push(entry);
                }
                Admission::Accept { warnings } => candidates.push((entry, warnings)),
            },
        }
    }
    candidates.sort_by(|a, b| a.0.citation_key.cmp(&b.0.citation_key));

    // records of one work, best candidate first
    let mut groups: Vec<Vec<(BibEntry, Vec<String>)>> = Vec::new();
    for c in candidates {
        match groups.iter_mut().find(|g| g.iter().any(|(m, _)| same_work(m, &c.0))) {
            Some(g) => g.push(c),
            None => groups.push(vec![c]),
        }
    }
    for g in &mut groups {
        g.sort_by_key(|(e, _)| (!has_venue(e), e.doi().is_none(), e.citation_key.clone()));
    }

    let mut output: Vec<BibEntry> = Vec::new();
    for group in groups {
        let (best, warnings) = &group[0];
        if output.iter().any(|o| o.citation_key == best.citation_key) {
            for (e, _) in &group {
                let reason = format!("citation key `{}` is taken by another work", best.citation_key);
                report.decide(&e.citation_key, Outcome::Quarantined, Some(reason), Vec::new());
                quarantine.push(e.clone());
            }
            continue;
        }
        let mut merged = best.clone();
        for (other, _) in &group[1..] {
            merged = replace_preprint_with(other, &merged, policy).unwrap_or(merged);
        }
        let mut superseded = group.len() > 1;

        let (matched, rest): (Vec<BibEntry>, Vec<BibEntry>) = std::mem::take(&mut existing)
            .into_iter()
            .partition(|e| e.citation_key == merged.citation_key || same_work(e, &merged));
        existing = rest;
        let unchanged = matched.len() == 1 && matched[0] == merged;
        for old in &matched {
            if same_work(old, &merged) {
                merged = replace_preprint_with(old, &merged, policy).unwrap_or(merged);
            }
            superseded |= old.citation_key != merged.citation_key;
        }
        let unchanged = unchanged || (matched.len() == 1 && matched[0] == merged);

        if unchanged {
            report.decide(&best.citation_key, Outcome::Deduplicated, Some("already in the corpus".into()), Vec::new());
        } else {
            report.decide(&best.citation_key, Outcome::Accepted, None, warnings.clone());
            if superseded {
                report.replaced += 1;
            }
        }
        for (other, _) in &group[1..] {
            let reason = format!("same work as `{}`", best.citation_key);
            report.decide(&other.citation_key, Outcome::Deduplicated, Some(reason), Vec::new());
        }
        output.push(merged);
    }

    output.extend(existing);
    output.sort_by(|a, b| a.citation_key.cmp(&b.citation_key));
    let new_bytes = serialize_bibtex(&output).into_bytes();
    let changed = match &old_bytes {
        Some(old) => *old != new_bytes,
        None => !new_bytes.is_empty(),
    };
    if changed {
        source::write_atomic(corpus_path, &new_bytes)?;
    }

    let qpath = sibling(corpus_path, QUARANTINE_FILE);
    if !quarantine.is_empty() || qpath.exists() {
        quarantine.sort_by(|a, b| a.citation_key.cmp(&b.citation_key));
        source::write_atomic(&qpath, serialize_bibtex(&quarantine).as_bytes())?;
    }
    Ok(report)
}
