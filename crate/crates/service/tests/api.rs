mod common;

use axum::http::StatusCode;
use common::*;
use donut_core::bib::parse_bibtex;
use donut_core::index::build_index;
use donut_core::taxonomy::TagClass;

#[tokio::test]
async fn golden_queries_over_http() {
    let app = app(golden_state());
    let r = get(&app, &format!("/search?q={}", encode(r#"title:"general""#))).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json["total"], 1);
    assert_eq!(keys(&r), ["dlotko2024euler"]);
    let hit = &r.json["hits"][0];
    for field in ["citation_key", "title", "authors", "year", "tags", "score", "highlights"] {
        assert!(hit.get(field).is_some(), "missing {field}");
    }
    for field in ["total", "suggestions", "elapsed_ms", "generation"] {
        assert!(r.json.get(field).is_some(), "missing {field}");
    }

    let r = get(&app, "/search?q=author:pawel").await;
    assert!(keys(&r).contains(&"dlotko2024euler".to_string()));

    let r = get(&app, "/search?q=homollogy").await;
    assert_eq!(r.json["total"], 0);
    assert_eq!(r.json["suggestions"][0]["suggested_term"], "homology");
    assert_eq!(r.json["suggestions"][0]["kind"], "spelling");
}

#[tokio::test]
async fn bad_queries_are_400_with_reason() {
    let app = app(golden_state());
    for (q, code) in [("", "empty_query"), ("%20%20", "empty_query"), ("title:%22gen", "unterminated_quote")] {
        let r = get(&app, &format!("/search?q={q}")).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{q}");
        assert_eq!(r.json["error"]["code"], code);
        assert!(r.json["error"]["message"].is_string());
    }
    let r = get(&app, "/search").await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let r = get(&app, "/search?q=x&limit=ten").await;
    assert_eq!(r.json["error"]["code"], "invalid_parameter");
}

#[tokio::test]
async fn no_snapshot_is_503() {
    let app = app(state_with(None));
    for uri in ["/search?q=x", "/entry/k", "/tags/tree", "/stats"] {
        let r = get(&app, uri).await;
        assert_eq!(r.status, StatusCode::SERVICE_UNAVAILABLE, "{uri}");
        assert_eq!(r.json["error"]["code"], "no_snapshot");
    }
}

#[tokio::test]
async fn paging_and_limits() {
    let app = app(state_with(Some(build_index(&donut_testkit::corpus_431()).unwrap())));
    let r = get(&app, "/search?q=homology&limit=1000").await;
    assert_eq!(r.json["limit"], 100);
    let all = get(&app, "/search?q=homology&limit=100").await;
    let second = get(&app, "/search?q=homology&offset=1&limit=1").await;
    assert_eq!(keys(&second)[0], keys(&all)[1]);
    // same query, same snapshot, same ordering
    let again = get(&app, "/search?q=homology&limit=100").await;
    assert_eq!(keys(&again), keys(&all));
}

#[tokio::test]
async fn entry_round_trips() {
    let app = app(golden_state());
    let r = get(&app, "/entry/dlotko2024euler").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json["entry"]["citation_key"], "dlotko2024euler");
    let parsed = parse_bibtex(r.json["bibtex"].as_str().unwrap());
    assert!(parsed.diagnostics.is_empty());
    let original = donut_testkit::golden_corpus().into_iter().find(|e| e.citation_key == "dlotko2024euler").unwrap();
    assert_eq!(parsed.entries, [original]);
    let r = get(&app, "/entry/nope").await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.json["error"]["code"], "not_found");
    assert_eq!(get(&app, "/nowhere").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn stats_and_tree() {
    let corpus = donut_testkit::corpus_431();
    let app = app(state_with(Some(build_index(&corpus).unwrap())));
    let r = get(&app, "/stats").await;
    assert_eq!(r.json["doc_count"], 431);
    assert_eq!(r.json["stats"]["flavors"]["innovate"], 58);
    assert_eq!(r.json["generation"], 1);

    let tree = get(&app, "/tags/tree").await.json;
    for class in TagClass::ALL {
        for node in tree[class.as_str()].as_array().unwrap() {
            let root = node["segment"].as_str().unwrap();
            let brute = corpus.iter().filter(|e| e.tags.iter().any(|t| t.class() == class && t.path()[0] == root)).count();
            assert_eq!(node["count"], brute, "{class}:{root}");
        }
    }

    let empty = app_empty().await;
    assert_eq!(empty.0["doc_count"], 0);
    for class in ["area", "tool", "input"] {
        assert_eq!(empty.1[class].as_array().unwrap().len(), 0);
    }
}

async fn app_empty() -> (serde_json::Value, serde_json::Value) {
    let app = app(state_with(Some(build_index(&[]).unwrap())));
    (get(&app, "/stats").await.json, get(&app, "/tags/tree").await.json)
}

#[tokio::test]
async fn cors_allows_browser_origin() {
    let app = app(golden_state());
    let req = axum::http::Request::get("/stats").header("origin", "http://ui.example").body(axum::body::Body::empty()).unwrap();
    let r = send(&app, req).await;
    assert_eq!(r.headers["access-control-allow-origin"], "*");
}
