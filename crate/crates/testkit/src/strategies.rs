//! Proptest generators for entries that must survive a BibTeX round trip.

use donut_core::bib::BibEntry;
use donut_core::taxonomy::{parse_tag, Flavor};
use proptest::prelude::*;

pub fn segment() -> impl Strategy<Value = String> {
    "[a-z0-9][a-z0-9 _-]{0,10}".prop_map(|s| s.trim_end().to_string())
}

pub fn tag_string() -> impl Strategy<Value = String> {
    (prop::sample::select(vec!["area", "tool", "input"]), prop::collection::vec(segment(), 1..4))
        .prop_map(|(c, segs)| format!("{c}:{}", segs.join(":")))
}

/// Text with balanced braces, diacritics, LaTeX accents and punctuation.
pub fn value() -> impl Strategy<Value = String> {
    let atom = prop::sample::select(vec![
        "graph", "Paweł", "Ødegaard", "{\\\"u}", "\\'e", "x^2", "50%", "a--b", "\"q\"", "@", "#", ",", "=", "(", ")",
        "{B}", "naïve", "ß", "日本", "  ", "\t", "-", "high-dimensional", "\\LaTeX", "~",
    ]);
    prop::collection::vec((atom, any::<bool>()), 0..12).prop_map(|parts| {
        let mut s = String::new();
        for (a, group) in parts {
            if group {
                s.push('{');
                s.push_str(a);
                s.push('}');
            } else {
                s.push_str(a);
            }
            s.push(' ');
        }
        s
    })
}

pub fn entry() -> impl Strategy<Value = BibEntry> {
    (
        prop::sample::select(vec!["article", "inproceedings", "misc", "phdthesis"]),
        "[A-Za-z][A-Za-z0-9_:.+/-]{0,15}",
        prop::collection::btree_map(
            prop::sample::select(vec!["title", "abstract", "journal", "note", "doi", "url", "x-custom", "pages"]),
            value(),
            0..6,
        ),
        prop::collection::vec(tag_string(), 0..5),
        prop::collection::btree_set(prop::sample::select(vec![Flavor::Innovate, Flavor::Confirm]), 0..3),
        prop::collection::btree_set("[a-z][a-z ]{0,8}[a-z]", 0..3),
        prop::option::of(1800u16..=2100),
    )
        .prop_map(|(ty, key, fields, tags, flavors, extra, year)| {
            let mut e = BibEntry::new(ty, key);
            for (k, v) in fields {
                e.set_field(k, v);
            }
            if let Some(y) = year {
                e.set_field("year", y.to_string());
            }
            for t in tags {
                e.tags.insert(parse_tag(&t).unwrap());
            }
            e.flavors = flavors;
            e.extra_keywords = extra.into_iter().collect();
            e
        })
}
