//! A brute-force evaluator that rescans every entry for every query. It
//! shares only the text primitives (tokenize, fold, stem) and the parser with
//! the engine; postings, positions, gaps and statistics are recomputed here
//! from scratch.

use std::collections::{BTreeMap, BTreeSet};

use donut_core::bib::BibEntry;
use donut_core::query::{Clause, QueryAst};
use donut_core::textnorm::{fold, stem, tokenize};
use donut_core::FieldPrefix;

/// One field value as a position-indexed list of term sets.
type Sequence = Vec<BTreeSet<String>>;

struct FieldView {
    values: Vec<Sequence>,
    /// Occurrence counts, joined forms included.
    counts: BTreeMap<String, usize>,
    /// Counted tokens, joined forms excluded.
    length: usize,
}

fn text_view<'a>(values: impl IntoIterator<Item = &'a str>, stemmed: bool) -> FieldView {
    let mut view = FieldView {
        values: Vec::new(),
        counts: BTreeMap::new(),
        length: 0,
    };
    for value in values {
        let mut seq: Sequence = Vec::new();
        for t in tokenize(value) {
            let term = if stemmed { stem(&t.folded) } else { t.folded.clone() };
            let p = t.position as usize;
            if seq.len() <= p {
                seq.resize(p + 1, BTreeSet::new());
            }
            seq[p].insert(term.clone());
            *view.counts.entry(term).or_default() += 1;
            if !t.joined {
                view.length += 1;
            }
        }
        view.values.push(seq);
    }
    view
}

fn keyword_view(terms: BTreeSet<String>) -> FieldView {
    FieldView {
        length: terms.len(),
        counts: terms.iter().map(|t| (t.clone(), 1)).collect(),
        values: terms.into_iter().map(|t| vec![BTreeSet::from([t])]).collect(),
    }
}

fn view(entry: &BibEntry, field: FieldPrefix) -> FieldView {
    let title = entry.field("title");
    let abs = entry.field("abstract");
    match field {
        FieldPrefix::Title => text_view(title, true),
        FieldPrefix::Abstract => text_view(abs, true),
        FieldPrefix::All => text_view(title.into_iter().chain(abs), true),
        FieldPrefix::Author => text_view(entry.authors(), false),
        FieldPrefix::Venue => text_view(["journal", "booktitle"].into_iter().filter_map(|f| entry.field(f)), false),
        FieldPrefix::Tag => {
            let mut terms = BTreeSet::new();
            for tag in &entry.tags {
                let path: Vec<String> = tag.path().iter().map(|s| fold(s)).collect();
                for n in 1..=path.len() {
                    let joined = path[..n].join(":");
                    terms.insert(format!("{}:{joined}", tag.class()));
                    terms.insert(joined);
                }
                terms.extend(path);
            }
            keyword_view(terms)
        }
        FieldPrefix::Year => keyword_view(entry.year().map(|y| y.to_string()).into_iter().collect()),
        FieldPrefix::Doi => keyword_view(entry.doi().into_iter().collect()),
    }
}

fn query_side(field: FieldPrefix, text: &str) -> Vec<String> {
    match field {
        FieldPrefix::Tag => {
            let t: Vec<String> = text.split(':').map(|s| fold(s.trim())).collect();
            if t.iter().any(String::is_empty) {
                vec![]
            } else {
                vec![t.join(":")]
            }
        }
        FieldPrefix::Year => {
            let t = text.trim();
            if !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()) {
                vec![t.to_string()]
            } else {
                vec![]
            }
        }
        FieldPrefix::Doi => {
            let probe = BibEntry::new("misc", "probe").with_field("doi", text);
            probe.doi().filter(|d| d.starts_with("10.")).into_iter().collect()
        }
        _ => {
            let stemmed = matches!(field, FieldPrefix::Title | FieldPrefix::Abstract | FieldPrefix::All);
            tokenize(text)
                .into_iter()
                .filter(|t| !t.joined)
                .map(|t| if stemmed { stem(&t.folded) } else { t.folded })
                .collect()
        }
    }
}

fn targets(prefix: FieldPrefix) -> Vec<FieldPrefix> {
    if prefix == FieldPrefix::All {
        vec![
            FieldPrefix::All,
            FieldPrefix::Author,
            FieldPrefix::Venue,
            FieldPrefix::Tag,
            FieldPrefix::Year,
            FieldPrefix::Doi,
        ]
    } else {
        vec![prefix]
    }
}

fn sequence_match(view: &FieldView, terms: &[String]) -> bool {
    view.values.iter().any(|seq| {
        (0..seq.len()).any(|p| terms.iter().enumerate().all(|(k, t)| seq.get(p + k).is_some_and(|s| s.contains(t))))
    })
}

/// Brute-force evaluator over a fixed corpus.
pub struct Oracle<'a> {
    corpus: &'a [BibEntry],
    views: Vec<BTreeMap<FieldPrefix, FieldView>>,
    dfs: BTreeMap<FieldPrefix, BTreeMap<String, usize>>,
}

impl<'a> Oracle<'a> {
    pub fn new(corpus: &'a [BibEntry]) -> Self {
        let views = corpus
            .iter()
            .map(|e| FieldPrefix::ALL.into_iter().map(|f| (f, view(e, f))).collect())
            .collect::<Vec<BTreeMap<FieldPrefix, FieldView>>>();
        let mut dfs: BTreeMap<FieldPrefix, BTreeMap<String, usize>> = BTreeMap::new();
        for v in &views {
            for (field, fv) in v {
                for term in fv.counts.keys() {
                    *dfs.entry(*field).or_default().entry(term.clone()).or_default() += 1;
                }
            }
        }
        Oracle { corpus, views, dfs }
    }

    fn df(&self, field: FieldPrefix, term: &str) -> usize {
        self.dfs.get(&field).and_then(|m| m.get(term)).copied().unwrap_or(0)
    }

    fn avg_len(&self, field: FieldPrefix) -> f64 {
        if self.views.is_empty() {
            return 0.0;
        }
        self.views.iter().map(|v| v[&field].length as f64).sum::<f64>() / self.views.len() as f64
    }

    fn bm25(&self, doc: usize, field: FieldPrefix, term: &str) -> f64 {
        let (k1, b) = (1.2, 0.75);
        let n = self.corpus.len() as f64;
        let df = self.df(field, term) as f64;
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        let v = &self.views[doc][&field];
        let tf = v.counts.get(term).copied().unwrap_or(0) as f64;
        let avg = self.avg_len(field);
        let norm = if avg > 0.0 { 1.0 - b + b * v.length as f64 / avg } else { 1.0 };
        idf * tf * (k1 + 1.0) / (tf + k1 * norm)
    }

    /// Score of `clause` for `doc`, or `None` when it does not match.
    fn clause_score(&self, doc: usize, clause: &Clause) -> Option<f64> {
        let text = clause.text();
        let mut total = None;
        for field in targets(clause.prefix()) {
            let terms = query_side(field, &text);
            if terms.is_empty() || !sequence_match(&self.views[doc][&field], &terms) {
                continue;
            }
            let distinct: BTreeSet<&String> = terms.iter().collect();
            let s: f64 = distinct.into_iter().map(|t| self.bm25(doc, field, t)).sum();
            *total.get_or_insert(0.0) += s;
        }
        total
    }

    /// Every matching entry with its score, ranked like the engine ranks:
    /// score descending, then citation key.
    pub fn evaluate(&self, ast: &QueryAst) -> Vec<(String, f64)> {
        let live: Vec<&Clause> =
            ast.clauses.iter().filter(|c| c.text().chars().any(char::is_alphanumeric)).collect();
        if live.is_empty() {
            return Vec::new();
        }
        let mut out: Vec<(String, f64)> = (0..self.corpus.len())
            .filter_map(|d| {
                let mut sum = 0.0;
                for c in &live {
                    sum += self.clause_score(d, c)?;
                }
                Some((self.corpus[d].citation_key.clone(), sum))
            })
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    /// Sorted keys of the matching entries.
    pub fn matching_keys(&self, ast: &QueryAst) -> Vec<String> {
        let mut keys: Vec<String> = self.evaluate(ast).into_iter().map(|(k, _)| k).collect();
        keys.sort();
        keys
    }

    /// Entries containing `term` in `field`, sorted by key.
    pub fn lookup(&self, field: FieldPrefix, term: &str) -> Vec<String> {
        let mut keys: Vec<String> = (0..self.corpus.len())
            .filter(|&d| self.views[d][&field].counts.contains_key(term))
            .map(|d| self.corpus[d].citation_key.clone())
            .collect();
        keys.sort();
        keys
    }
}

/// Ranked lists agree: same keys in the same order, scores within `tol`
/// relative error. Tied scores may legitimately appear in key order only.
pub fn same_ranking(engine: &[(String, f64)], oracle: &[(String, f64)], tol: f64) -> Result<(), String> {
    if engine.len() != oracle.len() {
        return Err(format!("{} hits vs {} expected", engine.len(), oracle.len()));
    }
    for (i, (a, b)) in engine.iter().zip(oracle).enumerate() {
        let scale = a.1.abs().max(b.1.abs()).max(1e-12);
        if (a.1 - b.1).abs() / scale > tol {
            return Err(format!("rank {i}: score {} ({}) vs {} ({})", a.1, a.0, b.1, b.0));
        }
        if a.0 != b.0 {
            // order among near-equal scores may differ only by rounding
            let same_score = (a.1 - b.1).abs() / scale <= tol;
            if !same_score || !oracle.iter().any(|(k, s)| k == &a.0 && (s - a.1).abs() / scale <= tol) {
                return Err(format!("rank {i}: {} vs {}", a.0, b.0));
            }
        }
    }
    Ok(())
}
