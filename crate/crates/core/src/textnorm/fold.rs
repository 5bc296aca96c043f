use std::collections::HashMap;
use std::sync::OnceLock;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Malformed transliteration table.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TableError {
    #[error("line {line}: expected `source<TAB>replacement`")]
    MissingTab { line: usize },
    #[error("line {line}: source `{found}` must be exactly one character")]
    BadSource { line: usize, found: String },
    #[error("line {line}: duplicate source character {ch:?}")]
    Duplicate { line: usize, ch: char },
}

const BUILTIN_TABLE: &str = include_str!("../../data/translit.tsv");

/// Character replacements for letters that have no compatibility
/// decomposition (ł, ø, ß, ...). Keys are single lowercase characters.
#[derive(Debug, Clone, Default)]
pub struct TranslitTable {
    map: HashMap<char, String>,
    version: Option<String>,
}

impl TranslitTable {
    /// Parses the `source<TAB>replacement` format. Blank lines and lines
    /// starting with `#` are skipped; a `# ... version: N` comment sets the version.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut table = TranslitTable::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(pos) = comment.find("version") {
                    let rest = comment[pos + "version".len()..].trim_start_matches([':', ' ', ',']);
                    let v: String = rest.chars().take_while(|c| !c.is_whitespace()).collect();
                    if !v.is_empty() {
                        table.version = Some(v);
                    }
                }
                continue;
            }
            let (source, replacement) = line.split_once('\t').ok_or(TableError::MissingTab { line: line_no })?;
            let mut chars = source.chars();
            let ch = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => {
                    return Err(TableError::BadSource {
                        line: line_no,
                        found: source.to_string(),
                    })
                }
            };
            if table.map.insert(ch, replacement.to_string()).is_some() {
                return Err(TableError::Duplicate { line: line_no, ch });
            }
        }
        Ok(table)
    }

    /// The table shipped with the crate.
    pub fn builtin() -> &'static TranslitTable {
        static TABLE: OnceLock<TranslitTable> = OnceLock::new();
        TABLE.get_or_init(|| TranslitTable::parse(BUILTIN_TABLE).expect("builtin transliteration table is valid"))
    }

    pub fn version(&self) -> Option<&str> {
        self.version.as_deref()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, ch: char) -> Option<&str> {
        self.map.get(&ch).map(String::as_str)
    }

    /// Folds `text` using this table. See [`fold`].
    pub fn fold(&self, text: &str) -> String {
        // Lowercasing and table replacements can surface characters that
        // fold further, so iterate to the fixed point.
        let mut cur = self.fold_once(text);
        for _ in 0..4 {
            let next = self.fold_once(&cur);
            if next == cur {
                break;
            }
            cur = next;
        }
        cur
    }

    fn fold_once(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        for c in text.nfkd() {
            if is_combining_mark(c) {
                continue;
            }
            for lower in c.to_lowercase() {
                match self.map.get(&lower) {
                    Some(rep) => out.push_str(rep),
                    None => {
                        if lower.is_ascii() {
                            out.push(lower);
                        } else {
                            // lowercase forms can carry their own marks
                            out.extend(lower.to_string().nfkd().filter(|c| !is_combining_mark(*c)));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Unicode compatibility decomposition, diacritic stripping, lowercasing and
/// table transliteration. Idempotent.
///
/// `fold("Paweł") == "pawel"`, `fold("Müller") == "muller"`.
pub fn fold(text: &str) -> String {
    if text.bytes().all(|b| b.is_ascii() && !b.is_ascii_uppercase()) {
        return text.to_string();
    }
    TranslitTable::builtin().fold(text)
}
