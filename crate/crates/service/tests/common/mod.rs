#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::connect_info::MockConnectInfo;
use axum::http::{Request, StatusCode};
use axum::Router;
use donut_core::index::build_index;
use donut_core::IndexSnapshot;
use donut_service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub const CLIENT: ([u8; 4], u16) = ([203, 0, 113, 9], 41234);

pub fn app(state: Arc<AppState>) -> Router {
    router(state).layer(MockConnectInfo(SocketAddr::from(CLIENT)))
}

pub fn golden_state() -> Arc<AppState> {
    let s = build_index(&donut_testkit::golden_corpus()).unwrap();
    Arc::new(AppState::unlogged(ServiceConfig::default(), Some(s)))
}

pub fn state_with(snapshot: Option<IndexSnapshot>) -> Arc<AppState> {
    Arc::new(AppState::unlogged(ServiceConfig::default(), snapshot))
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: axum::http::HeaderMap,
    pub json: Value,
}

pub async fn send(app: &Router, req: Request<Body>) -> Reply {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let json = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    Reply { status, headers, json }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

pub fn encode(q: &str) -> String {
    url_escape(q)
}

fn url_escape(s: &str) -> String {
    s.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

pub fn keys(reply: &Reply) -> Vec<String> {
    reply.json["hits"].as_array().unwrap().iter().map(|h| h["citation_key"].as_str().unwrap().to_string()).collect()
}
