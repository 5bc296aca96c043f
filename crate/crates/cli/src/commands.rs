use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use donut_core::bib::{parse_bibtex_bytes, BibEntry};
use donut_core::importer::{sync, FixtureSource};
use donut_core::index::{build_index, read_index_file, write_index_file};
use donut_core::query::{search as run_search, PageRequest, SuggestionKind};
use donut_core::taxonomy::{corpus_statistics, validate_entry};
use donut_service::logging::SystemClock;
use donut_service::{AppState, ServiceConfig};

use crate::Status;

/// Rows shown by `search` in table mode.
const TABLE_ROWS: usize = 20;

fn read_corpus(path: &Path) -> Result<(Vec<BibEntry>, Vec<String>), Status> {
    let bytes = std::fs::read(path).map_err(|e| Status::Failure(format!("{}: {e}", path.display())))?;
    let out = parse_bibtex_bytes(&bytes);
    let problems = out.errors().map(|d| format!("{}:{d}", path.display())).collect();
    Ok((out.entries, problems))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

pub fn import(source: &Path, corpus: &Path) -> Status {
    if !source.is_dir() {
        return Status::Failure(format!("{}: not a directory", source.display()));
    }
    match sync(&FixtureSource::new(source), corpus) {
        Ok(report) => {
            print_json(&report);
            if report.quarantined > 0 {
                Status::Findings
            } else {
                Status::Ok
            }
        }
        Err(e) => Status::Failure(e.to_string()),
    }
}

/// Why an entry cannot be indexed, if it cannot.
fn exclusion(entry: &BibEntry) -> Option<String> {
    let problems = entry.check();
    if !problems.is_empty() {
        return Some(problems.join("; "));
    }
    let report = validate_entry(entry);
    if !report.is_admissible_for_index {
        let missing: Vec<&str> = report.missing_classes.iter().map(|c| c.as_str()).collect();
        return Some(format!("missing tag class: {}", missing.join(", ")));
    }
    None
}

pub fn index(corpus: &Path, out: &Path) -> Status {
    let (entries, problems) = match read_corpus(corpus) {
        Ok(x) => x,
        Err(s) => return s,
    };
    for p in &problems {
        eprintln!("{p}");
    }
    let mut seen = HashSet::new();
    let mut kept = Vec::with_capacity(entries.len());
    let mut excluded = 0usize;
    for e in entries {
        if !seen.insert(e.citation_key.clone()) {
            eprintln!("excluded {}: duplicate citation key", e.citation_key);
            excluded += 1;
        } else if let Some(reason) = exclusion(&e) {
            eprintln!("excluded {}: {reason}", e.citation_key);
            excluded += 1;
        } else {
            kept.push(e);
        }
    }
    let started = Instant::now();
    let snapshot = match build_index(&kept) {
        Ok(s) => s,
        Err(e) => return Status::Failure(e.to_string()),
    };
    let elapsed = started.elapsed();
    if let Err(e) = write_index_file(out, &snapshot) {
        return Status::Failure(e.to_string());
    }
    println!("indexed {} entries in {:.1} ms -> {}", snapshot.doc_count(), elapsed.as_secs_f64() * 1000.0, out.display());
    if excluded > 0 || !problems.is_empty() {
        println!("{excluded} entries excluded");
        Status::Findings
    } else {
        Status::Ok
    }
}

pub fn search(index: &Path, query: &str, json: bool) -> Status {
    let snapshot = match read_index_file(index) {
        Ok(s) => s,
        Err(e) => return Status::Failure(format!("{}: {e}", index.display())),
    };
    let limit = if json { donut_core::query::DEFAULT_LIMIT } else { TABLE_ROWS };
    let response = match run_search(&snapshot, query, PageRequest { offset: 0, limit }) {
        Ok(r) => r,
        Err(e) => return Status::Usage(format!("{e} [{}]", e.code())),
    };
    if json {
        print_json(&response);
        return Status::Ok;
    }
    for d in &response.diagnostics {
        eprintln!("note: {d}");
    }
    if !response.hits.is_empty() {
        let key_width = response.hits.iter().map(|h| h.citation_key.len()).max().unwrap_or(3).max(3);
        println!("{:<key_width$}  {:>4}  {:>7}  title", "key", "year", "score");
        for h in &response.hits {
            let year = h.year.map_or_else(|| "-".to_string(), |y| y.to_string());
            println!("{:<key_width$}  {year:>4}  {:>7.3}  {}", h.citation_key, h.score, h.title.as_deref().unwrap_or(""));
        }
    }
    println!("{} of {} hits", response.hits.len(), response.total);
    if response.total == 0 {
        if let Some(s) = response.suggestions.iter().find(|s| s.kind == SuggestionKind::Spelling) {
            println!("Did you mean '{}'?", s.suggested_term);
        }
    }
    let related: Vec<&str> = response
        .suggestions
        .iter()
        .filter(|s| s.kind == SuggestionKind::Related)
        .map(|s| s.suggested_term.as_str())
        .collect();
    if !related.is_empty() {
        println!("Related: {}", related.join(", "));
    }
    Status::Ok
}

pub fn validate(corpus: &Path) -> Status {
    let (entries, problems) = match read_corpus(corpus) {
        Ok(x) => x,
        Err(s) => return s,
    };
    for p in &problems {
        eprintln!("{p}");
    }
    let mut bad = 0;
    for e in &entries {
        let report = validate_entry(e);
        for w in &report.warnings {
            println!("{}: warning: {w}", e.citation_key);
        }
        if let Some(reason) = exclusion(e) {
            println!("{}: {reason}", e.citation_key);
            bad += 1;
        }
    }
    println!("{} entries, {bad} inadmissible", entries.len());
    if bad > 0 {
        Status::Findings
    } else {
        Status::Ok
    }
}

pub fn stats(corpus: &Path, json: bool) -> Status {
    let (entries, problems) = match read_corpus(corpus) {
        Ok(x) => x,
        Err(s) => return s,
    };
    for p in &problems {
        eprintln!("{p}");
    }
    let stats = corpus_statistics(&entries);
    if json {
        let mut value = serde_json::to_value(&stats).expect("serializable");
        value["doc_count"] = entries.len().into();
        print_json(&value);
        return Status::Ok;
    }
    println!("entries: {}", stats.entries);
    println!("flavors: innovate {}, confirm {}", stats.flavors.innovate, stats.flavors.confirm);
    println!("without year: {}", stats.without_year);
    println!("by year:");
    for (y, n) in &stats.years {
        println!("  {y}  {n:>5}  {}", "#".repeat((*n).min(60)));
    }
    println!("tags per entry:");
    for (k, n) in &stats.tags_per_entry {
        println!("  {k:>2}  {n:>5}");
    }
    for (class, tags) in &stats.popular_tags {
        println!("top {class} tags:");
        for t in tags.iter().take(10) {
            println!("  {:>5}  {}", t.count, t.tag);
        }
    }
    Status::Ok
}

pub fn serve(config_path: &Path) -> Status {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => return Status::Failure(format!("{}: {e}", config_path.display())),
    };
    let mut config = match ServiceConfig::from_file_text(&text) {
        Ok(c) => c,
        Err(e) => return Status::Usage(format!("{}: {e}", config_path.display())),
    };
    if let Err(e) = config.apply_vars(std::env::vars()) {
        return Status::Usage(format!("environment: {e}"));
    }
    let state = match AppState::start(config, Arc::new(SystemClock)) {
        Ok(s) => Arc::new(s),
        Err(e) => return Status::Failure(e.to_string()),
    };
    if state.snapshot().is_none() {
        eprintln!("warning: {} not found; serving 503 until /admin/reload", state.config.index_path.display());
    }
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => return Status::Failure(e.to_string()),
    };
    eprintln!("listening on http://{}", state.config.listen);
    match runtime.block_on(donut_service::serve(state)) {
        Ok(()) => Status::Ok,
        Err(e) => Status::Failure(e.to_string()),
    }
}
