//! Test support: seeded synthetic corpora, a brute-force reference evaluator,
//! random queries and the fixture files.

use std::path::PathBuf;

use donut_core::bib::{parse_bibtex, BibEntry};

pub mod oracle;
pub mod queries;
pub mod strategies;
pub mod synth;

pub use oracle::{same_ranking, Oracle};
pub use queries::random_query;
pub use synth::{corpus_431, synth_corpus, SynthConfig};

/// The workspace `fixtures/` directory.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// The hand-written golden corpus.
pub fn golden_corpus() -> Vec<BibEntry> {
    let path = fixtures_dir().join("golden.bib");
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let out = parse_bibtex(&text);
    assert!(!out.has_errors(), "golden.bib: {:?}", out.diagnostics);
    out.entries
}
