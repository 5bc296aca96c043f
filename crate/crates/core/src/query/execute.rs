use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::parse::{parse_query, Clause, QueryAst, QueryError};
use super::suggest::{suggest, Suggestion};
use crate::bib::BibEntry;
use crate::index::{clause_alternatives, FieldPrefix, IndexSnapshot, PostingList, VENUE_FIELDS};
use crate::textnorm::{decode_latex, stem, tokenize_decoded};

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;
pub const DEFAULT_LIMIT: usize = 10;

/// Which slice of the ranked result list to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRequest {
    pub offset: usize,
    pub limit: usize,
}

impl Default for PageRequest {
    fn default() -> Self {
        PageRequest {
            offset: 0,
            limit: DEFAULT_LIMIT,
        }
    }
}

/// Matched words within one field of a hit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Highlight {
    pub field: String,
    /// The field value with LaTeX markup decoded.
    pub text: String,
    /// Byte ranges `[start, end)` of matches in `text`, sorted and disjoint.
    pub ranges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    pub citation_key: String,
    pub title: Option<String>,
    pub authors: Vec<String>,
    pub year: Option<u16>,
    pub tags: Vec<String>,
    pub score: f64,
    pub highlights: Vec<Highlight>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResponse {
    pub generation: u64,
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub hits: Vec<Hit>,
    pub suggestions: Vec<Suggestion>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    pub elapsed_ms: f64,
}

/// BM25 weight of one term in one field of one document.
pub fn bm25(snapshot: &IndexSnapshot, field: FieldPrefix, df: usize, tf: usize, doc: u32) -> f64 {
    let n = snapshot.doc_count() as f64;
    let df = df as f64;
    let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
    let avg = snapshot.avg_field_length(field);
    let norm = if avg > 0.0 {
        1.0 - B + B * f64::from(snapshot.field_length(field, doc)) / avg
    } else {
        1.0
    };
    let tf = tf as f64;
    idf * tf * (K1 + 1.0) / (tf + K1 * norm)
}

/// True when `lists[k]` has a position `p + k` for some start `p` of
/// `lists[0]`, i.e. the terms occur contiguously in order.
fn contiguous(positions: &[&[u32]]) -> bool {
    positions[0]
        .iter()
        .any(|&p| positions[1..].iter().enumerate().all(|(k, ps)| ps.binary_search(&(p + k as u32 + 1)).is_ok()))
}

/// Documents matching one field alternative, with their BM25 contribution.
fn alternative_scores(snapshot: &IndexSnapshot, field: FieldPrefix, terms: &[String], out: &mut HashMap<u32, f64>) {
    let mut lists: Vec<&PostingList> = Vec::with_capacity(terms.len());
    for t in terms {
        match snapshot.postings(field, t) {
            Some(l) => lists.push(l),
            None => return,
        }
    }
    let distinct: Vec<usize> = (0..terms.len()).filter(|&i| !terms[..i].contains(&terms[i])).collect();
    if lists.len() == 1 {
        let df = lists[0].doc_freq();
        for p in lists[0].iter() {
            *out.entry(p.doc).or_default() += bm25(snapshot, field, df, p.positions.len(), p.doc);
        }
        return;
    }
    let driver = (0..lists.len()).min_by_key(|&i| lists[i].doc_freq()).unwrap_or(0);
    for p in lists[driver].iter() {
        let mut positions: Vec<&[u32]> = Vec::with_capacity(lists.len());
        for l in &lists {
            match l.get(p.doc) {
                Some(dp) => positions.push(&dp.positions),
                None => break,
            }
        }
        if positions.len() != lists.len() || !contiguous(&positions) {
            continue;
        }
        let score: f64 = distinct.iter().map(|&i| bm25(snapshot, field, lists[i].doc_freq(), positions[i].len(), p.doc)).sum();
        *out.entry(p.doc).or_default() += score;
    }
}

/// Every document matching the conjunction, with its score, in no
/// particular order. Clauses without a single letter or digit are skipped
/// and reported in the returned diagnostics.
pub fn match_documents(snapshot: &IndexSnapshot, ast: &QueryAst) -> (Vec<(u32, f64)>, Vec<String>) {
    let mut diagnostics = Vec::new();
    let mut result: Option<HashMap<u32, f64>> = None;
    for clause in &ast.clauses {
        let text = clause.text();
        if !text.chars().any(char::is_alphanumeric) {
            diagnostics.push(format!("`{clause}` has nothing searchable and was ignored"));
            continue;
        }
        let alternatives = clause_alternatives(clause.prefix(), &text);
        let mut scores = HashMap::new();
        for (field, terms) in &alternatives {
            alternative_scores(snapshot, *field, terms, &mut scores);
        }
        result = Some(match result {
            None => scores,
            Some(prev) => prev
                .into_iter()
                .filter_map(|(doc, s)| scores.get(&doc).map(|t| (doc, s + t)))
                .collect(),
        });
        if result.as_ref().is_some_and(HashMap::is_empty) {
            break;
        }
    }
    (result.unwrap_or_default().into_iter().collect(), diagnostics)
}

/// Runs a parsed query and returns one page of ranked hits.
///
/// Scores are BM25 sums over clauses and, within a clause, over every field
/// alternative that matched. Equal scores are ordered by citation key.
/// Suggestions are left empty; see [`search`].
pub fn execute(snapshot: &IndexSnapshot, ast: &QueryAst, page: PageRequest) -> SearchResponse {
    let started = Instant::now();
    let (mut matches, mut diagnostics) = match_documents(snapshot, ast);
    let key = |d: u32| snapshot.docs[d as usize].citation_key.as_str();
    matches.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| key(a.0).cmp(key(b.0))));
    let total = matches.len();
    let wanted = highlight_terms(ast);
    let hits = matches
        .iter()
        .skip(page.offset)
        .take(page.limit)
        .map(|&(doc, score)| make_hit(&snapshot.docs[doc as usize], score, &wanted))
        .collect();
    let mut all_diagnostics = ast.diagnostics.clone();
    all_diagnostics.append(&mut diagnostics);
    SearchResponse {
        generation: snapshot.generation(),
        total,
        offset: page.offset,
        limit: page.limit,
        hits,
        suggestions: Vec::new(),
        diagnostics: all_diagnostics,
        elapsed_ms: started.elapsed().as_secs_f64() * 1000.0,
    }
}

/// Parses, executes and attaches suggestions.
pub fn search(snapshot: &IndexSnapshot, q: &str, page: PageRequest) -> Result<SearchResponse, QueryError> {
    let started = Instant::now();
    let ast = parse_query(q)?;
    let mut response = execute(snapshot, &ast, page);
    response.suggestions = suggest(snapshot, &ast);
    response.elapsed_ms = started.elapsed().as_secs_f64() * 1000.0;
    Ok(response)
}

/// Analyzed terms to mark, keyed by the entry field they are looked for in.
type HighlightTerms = HashMap<&'static str, BTreeSet<String>>;

fn highlight_terms(ast: &QueryAst) -> HighlightTerms {
    let mut wanted: HighlightTerms = HashMap::new();
    for clause in &ast.clauses {
        for (field, terms) in clause_alternatives(clause.prefix(), &clause.text()) {
            let targets: &[&'static str] = match field {
                FieldPrefix::All => &["title", "abstract"],
                FieldPrefix::Title => &["title"],
                FieldPrefix::Abstract => &["abstract"],
                FieldPrefix::Author => &["author"],
                FieldPrefix::Venue => &VENUE_FIELDS,
                FieldPrefix::Tag | FieldPrefix::Year | FieldPrefix::Doi => &[],
            };
            for t in targets {
                wanted.entry(t).or_default().extend(terms.iter().cloned());
            }
        }
    }
    wanted
}

fn highlight(entry: &BibEntry, field: &str, terms: &BTreeSet<String>) -> Option<Highlight> {
    let text = decode_latex(entry.field(field)?);
    let stemmed = matches!(field, "title" | "abstract");
    let mut ranges: Vec<[usize; 2]> = tokenize_decoded(&text)
        .into_iter()
        .filter(|t| terms.contains(&if stemmed { stem(&t.folded) } else { t.folded.clone() }))
        .map(|t| [t.span.start, t.span.end])
        .collect();
    if ranges.is_empty() {
        return None;
    }
    ranges.sort_unstable();
    let mut merged: Vec<[usize; 2]> = Vec::with_capacity(ranges.len());
    for r in ranges {
        match merged.last_mut() {
            Some(last) if r[0] <= last[1] => last[1] = last[1].max(r[1]),
            _ => merged.push(r),
        }
    }
    Some(Highlight {
        field: field.to_string(),
        text,
        ranges: merged,
    })
}

fn make_hit(entry: &BibEntry, score: f64, wanted: &HighlightTerms) -> Hit {
    let mut highlights = Vec::new();
    for field in ["title", "author", "abstract", "journal", "booktitle"] {
        if let Some(h) = wanted.get(field).and_then(|terms| highlight(entry, field, terms)) {
            highlights.push(h);
        }
    }
    Hit {
        citation_key: entry.citation_key.clone(),
        title: entry.title().map(decode_latex),
        authors: entry.authors().into_iter().map(decode_latex).collect(),
        year: entry.year(),
        tags: entry.tags.iter().map(ToString::to_string).collect(),
        score,
        highlights,
    }
}

/// Keys of all matching documents, sorted. Convenient for set comparisons.
pub fn matching_keys(snapshot: &IndexSnapshot, ast: &QueryAst) -> Vec<String> {
    let mut keys: Vec<String> =
        match_documents(snapshot, ast).0.into_iter().map(|(d, _)| snapshot.docs[d as usize].citation_key.clone()).collect();
    keys.sort();
    keys
}

impl Clause {
    /// Shorthand used by tests and tools: a one-clause query.
    pub fn into_query(self) -> QueryAst {
        QueryAst {
            clauses: vec![self],
            diagnostics: Vec::new(),
        }
    }
}
