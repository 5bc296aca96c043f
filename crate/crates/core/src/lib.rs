//! Core of the bibliographic search system: the BibTeX entry model, the tag
//! taxonomy, text analysis, the inverted index, the query engine and the
//! importer.

pub mod bib;
pub mod exec;
pub mod importer;
pub mod index;
pub mod query;
pub mod taxonomy;
pub mod textnorm;

pub use bib::{entry_fingerprint, parse_bibtex, serialize_bibtex, BibEntry};
pub use exec::Execution;
pub use index::{build_index, FieldPrefix, IndexSnapshot};
pub use query::{parse_query, search, QueryAst, SearchResponse};
pub use taxonomy::{parse_tag, validate_entry, Flavor, Tag, TagClass};
