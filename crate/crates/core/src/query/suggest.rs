use serde::Serialize;

use super::edit::bounded_edit_distance;
use super::parse::QueryAst;
use crate::index::IndexSnapshot;
use crate::textnorm::tokenize;

pub const MAX_DISTANCE: usize = 2;
pub const PER_TERM: usize = 3;
/// Words shorter than this get no suggestions; almost everything is near
/// them.
pub const MIN_WORD_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuggestionKind {
    /// The original word does not occur in the corpus.
    Spelling,
    /// The original word occurs; the suggestion is a nearby alternative.
    Related,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suggestion {
    pub kind: SuggestionKind,
    pub original_term: String,
    pub suggested_term: String,
    /// In (0, 1]: edit similarity times a document-frequency weight.
    pub score: f64,
    pub distance: usize,
}

/// Folded words of the free-text clauses, first occurrence order.
fn query_words(ast: &QueryAst) -> Vec<String> {
    let mut words: Vec<String> = Vec::new();
    for clause in &ast.clauses {
        if clause.prefix().is_keyword() {
            continue;
        }
        for t in tokenize(&clause.text()) {
            if !t.joined && !words.contains(&t.folded) {
                words.push(t.folded);
            }
        }
    }
    words
}

/// Alternative words for each query word, drawn from the corpus lexicon.
///
/// Candidates are lexicon words within edit distance 2 of the folded query
/// word, scored by `(1 - d / max_len) * ln(1 + df) / ln(1 + N)`. The best three
/// per word are returned. This only reads the snapshot; the query itself is
/// never changed or re-run.
pub fn suggest(snapshot: &IndexSnapshot, ast: &QueryAst) -> Vec<Suggestion> {
    let n = snapshot.doc_count();
    if n == 0 {
        return Vec::new();
    }
    let norm = (1.0 + n as f64).ln();
    let mut out = Vec::new();
    for word in query_words(ast) {
        let len = word.chars().count();
        if len < MIN_WORD_LEN {
            continue;
        }
        let kind = if snapshot.lexicon_freq(&word) == 0 {
            SuggestionKind::Spelling
        } else {
            SuggestionKind::Related
        };
        let mut candidates: Vec<Suggestion> = snapshot
            .lexicon()
            .iter()
            .filter(|(w, _)| **w != word)
            .filter_map(|(w, &df)| {
                let d = bounded_edit_distance(&word, w, MAX_DISTANCE)?;
                let max_len = len.max(w.chars().count()) as f64;
                let score = (1.0 - d as f64 / max_len) * (1.0 + f64::from(df)).ln() / norm;
                (score > 0.0).then(|| Suggestion {
                    kind,
                    original_term: word.clone(),
                    suggested_term: w.clone(),
                    score: score.min(1.0),
                    distance: d,
                })
            })
            .collect();
        candidates.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then(a.distance.cmp(&b.distance))
                .then_with(|| a.suggested_term.cmp(&b.suggested_term))
        });
        candidates.truncate(PER_TERM);
        out.extend(candidates);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bib::BibEntry;
    use crate::index::build_index;
    use crate::query::parse_query;

    fn corpus() -> IndexSnapshot {
        let titles = ["Persistent homology of images", "Homology inference", "Homotopy types of graphs"];
        let entries: Vec<BibEntry> = titles
            .iter()
            .enumerate()
            .map(|(i, t)| {
                BibEntry::new("article", format!("k{i}"))
                    .with_field("title", *t)
                    .with_tag("area:vision")
                    .with_tag("tool:persistent homology")
                    .with_tag("input:images")
            })
            .collect();
        build_index(&entries).unwrap()
    }

    #[test]
    fn misspelling() {
        let s = suggest(&corpus(), &parse_query("homollogy").unwrap());
        assert_eq!(s[0].kind, SuggestionKind::Spelling);
        assert_eq!(s[0].suggested_term, "homology");
        assert_eq!(s[0].distance, 1);
    }

    #[test]
    fn related_term() {
        let s = suggest(&corpus(), &parse_query("homotopy").unwrap());
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].kind, SuggestionKind::Related);
        assert_eq!(s[0].suggested_term, "homology");
        assert_eq!(s[0].distance, 2);
        assert!(s[0].score > 0.0 && s[0].score <= 1.0);
    }

    #[test]
    fn no_neighbor() {
        assert!(suggest(&corpus(), &parse_query("inference").unwrap()).is_empty());
        assert!(suggest(&IndexSnapshot::empty(), &parse_query("x").unwrap()).is_empty());
        assert!(suggest(&corpus(), &parse_query("tag:homolgy year:2020").unwrap()).is_empty());
    }
}
