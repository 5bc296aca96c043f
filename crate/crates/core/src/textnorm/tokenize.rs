use std::ops::Range;

use serde::Serialize;

use super::fold::fold;
use super::latex::decode_latex;

/// One token of a field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    /// The matched substring of the LaTeX-decoded text.
    pub surface: String,
    /// Folded form: lowercase ASCII letters and digits.
    pub folded: String,
    /// 0-based token index within the field.
    pub position: u32,
    /// Byte range of `surface` within the decoded text.
    pub span: Range<usize>,
    /// Set on the extra concatenated form emitted for a hyphenated word.
    pub joined: bool,
}

fn is_hyphen(c: char) -> bool {
    matches!(c, '-' | '\u{2010}' | '\u{2011}')
}

/// Tokenizes text after LaTeX decoding.
///
/// Splits on whitespace and punctuation. A hyphenated word yields each part
/// as its own consecutive token plus the concatenation of all parts at the
/// first part's position, so `high-dimensional` matches both
/// `high dimensional` and `highdimensional`.
pub fn tokenize(text: &str) -> Vec<Token> {
    let decoded = decode_latex(text);
    tokenize_decoded(&decoded)
}

/// Like [`tokenize`], for text that has already been through
/// [`decode_latex`]. Spans refer to `decoded`.
pub fn tokenize_decoded(decoded: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut position = 0u32;
    let chars: Vec<(usize, char)> = decoded.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        // one compound: runs of alphanumerics joined by single hyphens
        let mut parts: Vec<Range<usize>> = Vec::new();
        loop {
            let start = chars[i].0;
            while i < chars.len() && chars[i].1.is_alphanumeric() {
                i += 1;
            }
            let end = chars.get(i).map_or(decoded.len(), |c| c.0);
            parts.push(start..end);
            if i + 1 < chars.len() && is_hyphen(chars[i].1) && chars[i + 1].1.is_alphanumeric() {
                i += 1;
                continue;
            }
            break;
        }

        let first_position = position;
        let mut folded_parts = Vec::with_capacity(parts.len());
        for span in &parts {
            let folded = fold_token(&decoded[span.clone()]);
            if folded.is_empty() {
                continue;
            }
            tokens.push(Token {
                surface: decoded[span.clone()].to_string(),
                folded: folded.clone(),
                position,
                span: span.clone(),
                joined: false,
            });
            folded_parts.push(folded);
            position += 1;
        }
        if folded_parts.len() > 1 {
            let span = parts[0].start..parts[parts.len() - 1].end;
            tokens.push(Token {
                surface: decoded[span.clone()].to_string(),
                folded: folded_parts.concat(),
                position: first_position,
                span,
                joined: true,
            });
        }
    }
    tokens
}

/// Folds a single word and keeps only ASCII letters and digits. Characters
/// without an ASCII transliteration are dropped.
fn fold_token(word: &str) -> String {
    fold(word).chars().filter(char::is_ascii_alphanumeric).collect()
}
