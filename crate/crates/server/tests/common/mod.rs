#![allow(dead_code)]

use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use synopsviz_core::metadata::PredicateTable;
use synopsviz_server::{router, AppState, ServerConfig};
use tower::ServiceExt;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn app_with(config: ServerConfig) -> (Router, AppState) {
    let state = AppState::new(config, PredicateTable::default()).unwrap();
    (router(state.clone()), state)
}

pub fn app() -> Router {
    app_with(ServerConfig::default()).0
}

pub struct Reply {
    pub status: StatusCode,
    pub cache: Option<String>,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes)
            .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.bytes)))
    }
}

pub async fn send(app: &Router, req: Request<Body>) -> Reply {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let cache = resp
        .headers()
        .get("x-cache")
        .map(|v| v.to_str().unwrap().to_owned());
    let bytes = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    Reply {
        status,
        cache,
        bytes,
    }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

pub async fn upload(app: &Router, name: &str, format: &str, body: impl Into<Body>) -> Reply {
    let uri = format!("/datasets?name={name}&format={format}");
    send(app, Request::post(uri).body(body.into()).unwrap()).await
}

/// Uploads a fixture under its file stem and returns the dataset id.
pub async fn upload_fixture(app: &Router, file: &str) -> String {
    let path = fixture_path(file);
    let format = if file.ends_with(".ttl") {
        "turtle"
    } else {
        "ntriples"
    };
    let stem = path.file_stem().unwrap().to_str().unwrap().to_owned();
    let r = upload(app, &stem, format, std::fs::read(&path).unwrap()).await;
    assert_eq!(
        r.status,
        StatusCode::CREATED,
        "{}",
        String::from_utf8_lossy(&r.bytes)
    );
    r.json()["id"].as_str().unwrap().to_owned()
}

pub fn enc(s: &str) -> String {
    let mut out = String::new();
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-_.~".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}
