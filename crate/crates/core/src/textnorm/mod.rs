//! Text analysis shared by indexing and querying: LaTeX decoding, folding,
//! tokenization and stemming.

mod fold;
mod latex;
mod stem;
mod tokenize;

pub use fold::{fold, TableError, TranslitTable};
pub use latex::decode_latex;
pub use stem::stem;
pub use tokenize::{tokenize, tokenize_decoded, Token};
