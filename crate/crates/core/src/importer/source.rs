use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::bib::{BibEntry, KEYWORDS_FIELD};

#[derive(Debug, thiserror::Error)]
pub enum SourceError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("source failure: {0}")]
    Other(String),
}

/// One page of raw records and the cursor of the next page.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Page {
    pub records: Vec<Value>,
    pub next: Option<String>,
}

/// A paginated bibliographic source. The importer only ever reads from it.
pub trait SourceClient {
    /// Opaque token that changes whenever the library content changes.
    fn library_version(&self) -> Result<String, SourceError>;

    /// `None` asks for the first page.
    fn fetch_page(&self, cursor: Option<&str>) -> Result<Page, SourceError>;
}

/// Reads `pages/NNNN.json` files from a directory, one JSON array of records
/// per page, in file name order. A directory without pages is an empty
/// library.
#[derive(Debug, Clone)]
pub struct FixtureSource {
    dir: PathBuf,
}

impl FixtureSource {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureSource { dir: dir.into() }
    }

    fn pages_dir(&self) -> PathBuf {
        self.dir.join("pages")
    }

    fn page_names(&self) -> Result<Vec<String>, SourceError> {
        let dir = self.pages_dir();
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let io = |source| SourceError::Io { path: dir.clone(), source };
        let mut names = Vec::new();
        for item in fs::read_dir(&dir).map_err(io)? {
            let name = item.map_err(io)?.file_name().to_string_lossy().into_owned();
            if is_page_name(&name) {
                names.push(name);
            }
        }
        names.sort();
        Ok(names)
    }

    fn read(&self, name: &str) -> Result<Vec<u8>, SourceError> {
        let path = self.pages_dir().join(name);
        fs::read(&path).map_err(|source| SourceError::Io { path, source })
    }
}

fn is_page_name(name: &str) -> bool {
    name.strip_suffix(".json").is_some_and(|stem| stem.len() == 4 && stem.bytes().all(|b| b.is_ascii_digit()))
}

impl SourceClient for FixtureSource {
    fn library_version(&self) -> Result<String, SourceError> {
        let mut hasher = Sha256::new();
        for name in self.page_names()? {
            hasher.update(name.as_bytes());
            hasher.update([0]);
            hasher.update(self.read(&name)?);
        }
        Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }

    fn fetch_page(&self, cursor: Option<&str>) -> Result<Page, SourceError> {
        let names = self.page_names()?;
        let index = match cursor {
            None => 0,
            Some(c) => names.iter().position(|n| n == c).ok_or_else(|| SourceError::Format {
                path: self.pages_dir().display().to_string(),
                message: format!("unknown cursor `{c}`"),
            })?,
        };
        let Some(name) = names.get(index) else {
            return Ok(Page::default());
        };
        let bytes = self.read(name)?;
        let records: Vec<Value> = serde_json::from_slice(&bytes).map_err(|e| SourceError::Format {
            path: name.clone(),
            message: format!("expected a JSON array of records: {e}"),
        })?;
        Ok(Page {
            records,
            next: names.get(index + 1).cloned(),
        })
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Maps a raw record `{"key", "entry_type", "fields": {..}}` to an entry.
/// The `keywords` field is split into tags and flavors.
pub fn map_record(record: &Value) -> Result<BibEntry, String> {
    let obj = record.as_object().ok_or("record is not a JSON object")?;
    let key = obj.get("key").and_then(Value::as_str).map(str::trim).filter(|k| !k.is_empty()).ok_or("record has no key")?;
    let entry_type = obj
        .get("entry_type")
        .or_else(|| obj.get("type"))
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|t| !t.is_empty() && t.chars().all(|c| c.is_ascii_alphanumeric()))
        .ok_or_else(|| format!("record `{key}` has no valid entry_type"))?;
    let fields = obj.get("fields").and_then(Value::as_object).ok_or_else(|| format!("record `{key}` has no field map"))?;

    let mut entry = BibEntry::new(entry_type, key);
    let mut keywords = None;
    for (name, value) in fields {
        let name = name.trim().to_lowercase();
        let value = scalar(value).ok_or_else(|| format!("record `{key}`: field `{name}` is not a scalar"))?;
        if name == KEYWORDS_FIELD {
            keywords = Some(value);
            continue;
        }
        if entry.fields.contains_key(&name) {
            return Err(format!("record `{key}`: field `{name}` given twice"));
        }
        if !value.trim().is_empty() {
            entry.set_field(&name, value.trim());
        }
    }
    if let Some(kw) = keywords {
        entry.absorb_keywords(&kw);
    }
    Ok(entry)
}

/// Writes `bytes` to `path` through a temporary sibling and a rename, so
/// readers see either the old or the new content.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    use std::io::Write;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
