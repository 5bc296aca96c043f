mod common;

use std::fs;
use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use common::*;
use donut_core::index::{build_index, write_index_file};
use donut_service::logging::{decrypt_record, ManualClock, LogKey};
use donut_service::{AppState, ServiceConfig, StartError};
use time::macros::datetime;

struct Setup {
    _dir: tempfile::TempDir,
    config: ServiceConfig,
    key: LogKey,
}

fn setup(retention_days: u32) -> Setup {
    let dir = tempfile::tempdir().unwrap();
    let key = LogKey::generate();
    let key_path = dir.path().join("log.key");
    fs::write(&key_path, key.to_hex()).unwrap();
    let index_path = dir.path().join("donut.idx");
    write_index_file(&index_path, &build_index(&donut_testkit::golden_corpus()).unwrap()).unwrap();
    let config = ServiceConfig {
        index_path,
        log_key_path: key_path,
        log_dir: dir.path().join("logs"),
        retention_days,
        admin_token: Some("secret".into()),
        ..ServiceConfig::default()
    };
    Setup { _dir: dir, config, key }
}

fn lines(state: &AppState) -> Vec<(String, String)> {
    let log = state.log.as_ref().unwrap();
    log.flush();
    let mut out = Vec::new();
    let mut files: Vec<_> = fs::read_dir(log.dir()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    for f in files {
        let name = f.file_name().unwrap().to_string_lossy().to_string();
        for line in fs::read_to_string(&f).unwrap().lines() {
            out.push((name.clone(), line.to_string()));
        }
    }
    out
}

#[test]
fn missing_key_fails_closed() {
    let s = setup(30);
    let config = ServiceConfig {
        log_key_path: s.config.log_key_path.with_file_name("absent.key"),
        ..s.config.clone()
    };
    let clock = Arc::new(ManualClock::new(datetime!(2024-03-01 10:00 UTC)));
    assert!(matches!(AppState::start(config, clock), Err(StartError::Log(_))));
}

#[tokio::test]
async fn no_cookies_and_no_identifying_headers() {
    let s = setup(30);
    let clock = Arc::new(ManualClock::new(datetime!(2024-03-01 10:00 UTC)));
    let state = Arc::new(AppState::start(s.config.clone(), clock).unwrap());
    let app = app(Arc::clone(&state));
    let requests = [
        Request::get("/search?q=homology").body(Body::empty()).unwrap(),
        Request::get("/search?q=").body(Body::empty()).unwrap(),
        Request::get("/entry/dlotko2024euler").body(Body::empty()).unwrap(),
        Request::get("/entry/missing").body(Body::empty()).unwrap(),
        Request::get("/tags/tree").body(Body::empty()).unwrap(),
        Request::get("/stats").body(Body::empty()).unwrap(),
        Request::post("/admin/reload").body(Body::empty()).unwrap(),
        Request::post("/admin/reload").header("authorization", "Bearer secret").body(Body::empty()).unwrap(),
        Request::get("/unknown").header("cookie", "id=1").body(Body::empty()).unwrap(),
    ];
    for req in requests {
        let uri = req.uri().to_string();
        let r = send(&app, req).await;
        assert!(r.headers.get("set-cookie").is_none(), "{uri}");
        for (name, value) in &r.headers {
            let v = value.to_str().unwrap_or("");
            assert!(!v.contains("203.0.113.9"), "{uri}: {name}");
        }
    }
}

#[tokio::test]
async fn logs_are_encrypted_and_anonymized() {
    let s = setup(30);
    let clock = Arc::new(ManualClock::new(datetime!(2024-03-01 10:00 UTC)));
    let state = Arc::new(AppState::start(s.config.clone(), Arc::clone(&clock) as _).unwrap());
    let app = app(Arc::clone(&state));
    get(&app, "/search?q=homology").await;
    get(&app, "/stats").await;
    clock.advance(time::Duration::days(1));
    get(&app, "/search?q=homology").await;

    let lines = lines(&state);
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0].0, "2024-03-01.log");
    assert_eq!(lines[2].0, "2024-03-02.log");
    let records: Vec<_> = lines
        .iter()
        .map(|(_, l)| {
            assert!(!l.contains("homology") && !l.contains("203.0.113"));
            decrypt_record(&s.key, l).unwrap()
        })
        .collect();
    for r in &records {
        let plain = serde_json::to_string(r).unwrap();
        assert!(!plain.contains("203.0.113.9") && !plain.contains("41234"), "{plain}");
    }
    assert_eq!(records[0].route, "/search");
    assert_eq!(records[0].query.as_deref(), Some("q=homology"));
    assert_eq!(records[0].status, 200);
    assert_eq!(records[0].timestamp, "2024-03-01T10:00:00Z");
    // same client, same day: same hash; next day: a different one
    assert_eq!(records[0].anonymized_client, records[1].anonymized_client);
    assert_ne!(records[0].anonymized_client, records[2].anonymized_client);

    let stats = get(&app, "/stats").await.json;
    assert_eq!(stats["requests"]["2024-03-01"]["/search"], 1);
    assert_eq!(stats["requests"]["2024-03-02"]["/search"], 1);
}

#[tokio::test]
async fn purge_removes_expired_day_files() {
    let s = setup(1);
    fs::create_dir_all(&s.config.log_dir).unwrap();
    fs::write(s.config.log_dir.join("2024-02-27.log"), "old\n").unwrap();
    let clock = Arc::new(ManualClock::new(datetime!(2024-03-01 10:00 UTC)));
    let state = Arc::new(AppState::start(s.config.clone(), Arc::clone(&clock) as _).unwrap());
    // purged at start-up: three days old with a one-day retention
    assert!(!s.config.log_dir.join("2024-02-27.log").exists());

    let app = app(Arc::clone(&state));
    get(&app, "/stats").await;
    state.log.as_ref().unwrap().flush();
    assert!(s.config.log_dir.join("2024-03-01.log").exists());
    clock.advance(time::Duration::days(3));
    assert_eq!(state.log.as_ref().unwrap().purge().unwrap(), 1);
    assert!(!s.config.log_dir.join("2024-03-01.log").exists());

    // the writer purges on its own when the day changes
    fs::write(s.config.log_dir.join("2024-03-02.log"), "x\n").unwrap();
    get(&app, "/stats").await;
    state.log.as_ref().unwrap().flush();
    assert!(!s.config.log_dir.join("2024-03-02.log").exists());
    assert!(s.config.log_dir.join("2024-03-04.log").exists());
}
