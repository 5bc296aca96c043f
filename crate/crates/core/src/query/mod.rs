//! The query language, ranked execution against a snapshot, and advisory
//! suggestions.

mod edit;
mod execute;
mod parse;
mod suggest;

pub use edit::{bounded_edit_distance, edit_distance};
pub use execute::{
    bm25, execute, match_documents, matching_keys, search, Highlight, Hit, PageRequest, SearchResponse, B, DEFAULT_LIMIT, K1,
};
pub use parse::{parse_query, Clause, QueryAst, QueryError};
pub use suggest::{suggest, Suggestion, SuggestionKind, MAX_DISTANCE, MIN_WORD_LEN, PER_TERM};
