use std::fmt::Write;

use super::{BibEntry, KEYWORDS_FIELD};

/// Serializes entries with brace-delimited values, fields in insertion order
/// and the `keywords` field last. Entries are separated by a blank line.
pub fn serialize_bibtex(entries: &[BibEntry]) -> String {
    let mut out = String::new();
    for (i, entry) in entries.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&serialize_entry(entry));
    }
    out
}

pub fn serialize_entry(entry: &BibEntry) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@{}{{{},", entry.entry_type, entry.citation_key);
    for (name, value) in &entry.fields {
        let _ = writeln!(out, "  {name} = {{{value}}},");
    }
    if let Some(kw) = entry.keywords_value() {
        let _ = writeln!(out, "  {KEYWORDS_FIELD} = {{{kw}}},");
    }
    out.push_str("}\n");
    out
}
