use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use donut_core::bib::serialize_bibtex;
use donut_testkit::{corpus_431, fixtures_dir};

fn donut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_donut")).args(args).output().expect("run donut")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn golden() -> PathBuf {
    fixtures_dir().join("golden.bib")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn golden_index(dir: &Path) -> PathBuf {
    let out = dir.join("golden.idx");
    let o = donut(&["index", "--corpus", p(&golden()), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

/// Table rows between the header and the `N of M hits` line.
fn rows(text: &str) -> Vec<String> {
    text.lines()
        .skip_while(|l| !l.starts_with("key"))
        .skip(1)
        .take_while(|l| !l.contains(" hits"))
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect()
}

#[test]
fn index_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = golden_index(dir.path());
    let b = dir.path().join("again.idx");
    assert_eq!(code(&donut(&["index", "--corpus", p(&golden()), "--out", p(&b)])), 0);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn empty_corpus_indexes_to_zero_documents() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.bib");
    std::fs::write(&corpus, "").unwrap();
    let out = dir.path().join("empty.idx");
    let o = donut(&["index", "--corpus", p(&corpus), "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("indexed 0 entries"));
    let s = donut(&["search", "--index", p(&out), "homology"]);
    assert_eq!(code(&s), 0);
    assert!(stdout(&s).contains("0 of 0 hits"));
}

#[test]
fn missing_tag_class_is_excluded_and_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.bib");
    let text = std::fs::read_to_string(golden()).unwrap()
        + "\n@article{lonely2020,\n  title = {Alone},\n  year = {2020},\n  keywords = {area:medicine; tool:mapper},\n}\n";
    std::fs::write(&corpus, text).unwrap();
    let out = dir.path().join("bad.idx");
    let o = donut(&["index", "--corpus", p(&corpus), "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lonely2020"));
    assert!(stdout(&o).contains("indexed 10 entries"));

    let v = donut(&["validate", "--corpus", p(&corpus)]);
    assert_eq!(code(&v), 1);
    assert!(stdout(&v).contains("lonely2020: missing tag class: input"));
    assert_eq!(code(&donut(&["validate", "--corpus", p(&golden())])), 0);
}

#[test]
fn golden_queries_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let idx = golden_index(dir.path());
    let idx = p(&idx);

    let o = donut(&["search", "--index", idx, "title:\"general\""]);
    assert_eq!(rows(&stdout(&o)), ["dlotko2024euler"]);

    let o = donut(&["search", "--index", idx, "homollogy"]);
    assert_eq!(code(&o), 0);
    assert!(rows(&stdout(&o)).is_empty());
    assert!(stdout(&o).contains("Did you mean 'homology'?"));

    let o = donut(&["search", "--index", idx, "homotopy"]);
    assert_eq!(rows(&stdout(&o)), ["haddad2017homotopy"]);
    assert!(stdout(&o).contains("Related: homology"));
}

#[test]
fn json_search_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let idx = golden_index(dir.path());
    let o = donut(&["search", "--index", p(&idx), "--json", "general"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["total"], 2);
    let keys: Vec<&str> = v["hits"].as_array().unwrap().iter().map(|h| h["citation_key"].as_str().unwrap()).collect();
    assert!(keys.contains(&"dlotko2024euler") && keys.contains(&"rossi2021seizures"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let idx = golden_index(dir.path());
    let o = donut(&["search", "--index", p(&idx), ""]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty_query"));
    assert_eq!(code(&donut(&["search", "--index", p(&idx), "\"open"])), 2);
    assert_eq!(code(&donut(&["index", "--bogus"])), 2);
    assert_eq!(code(&donut(&[])), 2);
}

#[test]
fn runtime_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.idx");
    assert_eq!(code(&donut(&["search", "--index", p(&missing), "x"])), 3);
    let corrupt = dir.path().join("corrupt.idx");
    std::fs::write(&corrupt, b"DONUTIDX garbage").unwrap();
    assert_eq!(code(&donut(&["search", "--index", p(&corrupt), "x"])), 3);
}

#[test]
fn stats_reports_flavor_counts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c431.bib");
    std::fs::write(&corpus, serialize_bibtex(&corpus_431())).unwrap();
    let o = donut(&["stats", "--corpus", p(&corpus), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["doc_count"], 431);
    assert_eq!(v["flavors"]["innovate"], 58);

    let t = donut(&["stats", "--corpus", p(&corpus)]);
    assert!(stdout(&t).contains("flavors: innovate 58"));
}

#[test]
fn import_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.bib");
    let source = fixtures_dir().join("source");
    let first = donut(&["import", "--source", p(&source), "--corpus", p(&corpus)]);
    assert_eq!(code(&first), 0);
    let report: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!((report["fetched"].as_u64(), report["accepted"].as_u64(), report["replaced"].as_u64()), (Some(4), Some(3), Some(1)));
    let before = std::fs::read(&corpus).unwrap();
    assert!(String::from_utf8_lossy(&before).contains("preprint_url = {https://arxiv.org/abs/2103.04567}"));

    let second = donut(&["import", "--source", p(&source), "--corpus", p(&corpus)]);
    let report: serde_json::Value = serde_json::from_slice(&second.stdout).unwrap();
    assert_eq!((report["accepted"].as_u64(), report["deduplicated"].as_u64()), (Some(0), Some(4)));
    assert_eq!(std::fs::read(&corpus).unwrap(), before);
}

#[test]
fn import_from_empty_source() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.bib");
    let o = donut(&["import", "--source", p(dir.path()), "--corpus", p(&corpus)]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["fetched", "accepted", "quarantined", "replaced", "deduplicated"] {
        assert_eq!(v[k], 0, "{k}");
    }
}

#[test]
fn quarantine_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let pages = dir.path().join("src/pages");
    std::fs::create_dir_all(&pages).unwrap();
    let untagged = r#"[{"key": "partial2020", "entry_type": "article", "fields": {
        "title": "Half Tagged", "year": "2020", "journal": "J. Partial",
        "keywords": "area:finance; tool:mapper"}}]"#;
    std::fs::write(pages.join("0001.json"), untagged).unwrap();
    let corpus = dir.path().join("corpus.bib");
    let o = donut(&["import", "--source", p(&dir.path().join("src")), "--corpus", p(&corpus)]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["quarantined"], 1);
}
