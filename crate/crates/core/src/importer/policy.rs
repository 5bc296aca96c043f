use serde::Serialize;

use crate::bib::{title_fingerprint, BibEntry};
use crate::taxonomy::validate_entry;

/// Hosts of public preprint servers. A URL on one of these (or a subdomain)
/// counts as open access.
pub const DEFAULT_PREPRINT_HOSTS: [&str; 11] = [
    "arxiv.org",
    "biorxiv.org",
    "medrxiv.org",
    "chemrxiv.org",
    "hal.science",
    "hal.archives-ouvertes.fr",
    "osf.io",
    "zenodo.org",
    "eprint.iacr.org",
    "preprints.org",
    "researchsquare.com",
];

/// Open-access detection rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OaPolicy {
    pub preprint_hosts: Vec<String>,
}

impl Default for OaPolicy {
    fn default() -> Self {
        OaPolicy {
            preprint_hosts: DEFAULT_PREPRINT_HOSTS.iter().map(|h| h.to_string()).collect(),
        }
    }
}

impl OaPolicy {
    pub fn is_preprint_url(&self, raw: &str) -> bool {
        let Ok(url) = url::Url::parse(raw.trim()) else {
            return false;
        };
        let Some(host) = url.host_str() else {
            return false;
        };
        let host = host.to_ascii_lowercase();
        self.preprint_hosts
            .iter()
            .any(|h| host == *h || host.strip_suffix(h.as_str()).is_some_and(|rest| rest.ends_with('.')))
    }

    /// `oa = true`, or a URL on a preprint server.
    pub fn is_open_access(&self, entry: &BibEntry) -> bool {
        entry.field("oa").is_some_and(|v| v.trim().eq_ignore_ascii_case("true"))
            || entry.field("url").is_some_and(|u| self.is_preprint_url(u))
    }

    /// A public link to the preprint version of `entry`, if it has one.
    pub fn public_preprint_url(&self, entry: &BibEntry) -> Option<String> {
        if let Some(u) = entry.field("preprint_url").filter(|u| !u.trim().is_empty()) {
            return Some(u.trim().to_string());
        }
        if let Some(u) = entry.field("url").filter(|u| self.is_preprint_url(u)) {
            return Some(u.trim().to_string());
        }
        let eprint = entry.field("eprint").map(str::trim).filter(|e| !e.is_empty())?;
        let archive = entry.field("archiveprefix").or_else(|| entry.field("eprinttype")).unwrap_or("arxiv");
        archive.trim().eq_ignore_ascii_case("arxiv").then(|| format!("https://arxiv.org/abs/{eprint}"))
    }
}

/// Publication venue: a journal or proceedings title.
pub fn has_venue(entry: &BibEntry) -> bool {
    entry.has_field("journal") || entry.has_field("booktitle")
}

/// True when both entries describe the same work: equal DOIs, or equal
/// folded title and year.
pub fn same_work(a: &BibEntry, b: &BibEntry) -> bool {
    if let (Some(x), Some(y)) = (a.doi(), b.doi()) {
        if x == y {
            return true;
        }
    }
    matches!((title_fingerprint(a), title_fingerprint(b)), (Some(x), Some(y)) if x == y)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{existing}` and `{published}` are different works")]
pub struct ReplaceError {
    pub existing: String,
    pub published: String,
}

pub fn replace_preprint(existing: &BibEntry, published: &BibEntry) -> Result<BibEntry, ReplaceError> {
    replace_preprint_with(existing, published, &OaPolicy::default())
}

/// Supersedes `existing` with `published`.
///
/// The result is `published` carrying the union of both tag and flavor sets.
/// When `published` is not open access and `existing` has a public preprint
/// link, that link is kept in `preprint_url`.
pub fn replace_preprint_with(
    existing: &BibEntry,
    published: &BibEntry,
    policy: &OaPolicy,
) -> Result<BibEntry, ReplaceError> {
    if !same_work(existing, published) {
        return Err(ReplaceError {
            existing: existing.citation_key.clone(),
            published: published.citation_key.clone(),
        });
    }
    let mut out = published.clone();
    out.tags.extend(existing.tags.iter().cloned());
    out.flavors.extend(existing.flavors.iter().copied());
    for kw in &existing.extra_keywords {
        if !out.extra_keywords.contains(kw) {
            out.extra_keywords.push(kw.clone());
        }
    }
    if !policy.is_open_access(published) && !published.has_field("preprint_url") {
        if let Some(link) = policy.public_preprint_url(existing) {
            if published.field("url").map(str::trim) != Some(link.as_str()) {
                out.set_field("preprint_url", link);
            }
        }
    }
    Ok(out)
}

/// Outcome of [`admissibility_filter`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "decision", rename_all = "lowercase")]
pub enum Admission {
    Accept { warnings: Vec<String> },
    Quarantine { reason: String },
}

impl Admission {
    pub fn is_accept(&self) -> bool {
        matches!(self, Admission::Accept { .. })
    }
}

pub fn admissibility_filter(entry: &BibEntry) -> Admission {
    admissibility_filter_with(entry, &OaPolicy::default())
}

/// Corpus admission rules: the entry is published (has a venue) or on a
/// preprint server, carries a tag of every class, and is not an
/// abstract-only conference item. A missing DOI only warns.
pub fn admissibility_filter_with(entry: &BibEntry, policy: &OaPolicy) -> Admission {
    let quarantine = |reason: String| Admission::Quarantine { reason };
    let problems = entry.check();
    if !problems.is_empty() {
        return quarantine(format!("invalid entry: {}", problems.join("; ")));
    }
    if entry.entry_type == "inproceedings"
        && ["note", "pages"].iter().any(|f| entry.field(f).is_some_and(|v| v.trim().eq_ignore_ascii_case("abstract")))
    {
        return quarantine("abstract-only conference contribution".into());
    }
    let on_preprint_server = entry.has_field("eprint")
        || entry.has_field("preprint_url")
        || entry.field("url").is_some_and(|u| policy.is_preprint_url(u));
    if !has_venue(entry) && !on_preprint_server {
        return quarantine("neither published in a venue nor available on a preprint server".into());
    }
    let report = validate_entry(entry);
    if !report.missing_classes.is_empty() {
        let names: Vec<&str> = report.missing_classes.iter().map(|c| c.as_str()).collect();
        return quarantine(format!("missing tag class: {}", names.join(", ")));
    }
    if let Some(kw) = entry.extra_keywords.iter().find(|k| k.contains(':')) {
        return quarantine(format!("unrecognized tag `{kw}`"));
    }
    let mut warnings = report.warnings;
    if entry.doi().is_none() {
        warnings.push("no DOI".into());
    }
    Admission::Accept { warnings }
}
