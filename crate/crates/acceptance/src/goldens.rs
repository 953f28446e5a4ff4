//! Golden responses for the bundled fixtures. Run with `UPDATE_GOLDENS=1`
//! to rewrite them.

use std::fs;
use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use synopsviz_core::metadata::PredicateTable;
use synopsviz_server::{router, AppState, ServerConfig};
use tower::ServiceExt;

/// (fixture file, property used for the hierarchy endpoint)
pub const CASES: &[(&str, &str)] = &[
    ("small.nt", "http://example.org/population"),
    ("countries.nt", "http://example.org/population"),
    ("zoo.ttl", "http://example.org/weight"),
    ("void-sample.ttl", "http://example.org/score"),
];

pub const ENDPOINTS: &[&str] = &["statistics", "facets", "metadata", "treemap", "hierarchy"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn golden_path(fixture: &str, endpoint: &str) -> PathBuf {
    let stem = fixture.split('.').next().unwrap_or(fixture);
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("goldens")
        .join(stem)
        .join(format!("{endpoint}.json"))
}

pub fn app() -> Router {
    router(
        AppState::new(ServerConfig::default(), PredicateTable::default()).expect("default state"),
    )
}

pub async fn fetch(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.expect("infallible router");
    let status = resp.status();
    let bytes = resp
        .into_body()
        .collect()
        .await
        .expect("body")
        .to_bytes()
        .to_vec();
    (status, bytes)
}

fn enc(s: &str) -> String {
    s.bytes()
        .map(|b| {
            if b.is_ascii_alphanumeric() || b"-_.~".contains(&b) {
                (b as char).to_string()
            } else {
                format!("%{b:02X}")
            }
        })
        .collect()
}

/// Uploads a fixture under its file stem and returns the dataset id.
pub async fn upload(app: &Router, fixture: &str) -> Result<String, String> {
    let bytes = fs::read(fixture_path(fixture)).map_err(|e| format!("{fixture}: {e}"))?;
    let format = if fixture.ends_with(".ttl") {
        "turtle"
    } else {
        "ntriples"
    };
    let stem = fixture.split('.').next().unwrap_or(fixture);
    let req = Request::post(format!("/datasets?name={stem}&format={format}"))
        .body(Body::from(bytes))
        .expect("request");
    let (status, body) = fetch(app, req).await;
    if status != StatusCode::CREATED {
        return Err(format!(
            "{fixture}: upload returned {status}: {}",
            String::from_utf8_lossy(&body)
        ));
    }
    let json: serde_json::Value = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
    json["id"]
        .as_str()
        .map(str::to_owned)
        .ok_or_else(|| "no id in upload response".to_owned())
}

pub fn uri(id: &str, endpoint: &str, property: &str) -> String {
    match endpoint {
        "hierarchy" => format!("/datasets/{id}/hierarchy?property={}", enc(property)),
        _ => format!("/datasets/{id}/{endpoint}"),
    }
}

/// Compares every fixture/endpoint response with its golden file, or
/// rewrites the files when `UPDATE_GOLDENS` is set. Returns one message per
/// mismatch. Files hold the raw response bytes.
pub async fn check_all() -> Vec<String> {
    let update = std::env::var_os("UPDATE_GOLDENS").is_some();
    let app = app();
    let mut problems = Vec::new();
    for (fixture, property) in CASES {
        let id = match upload(&app, fixture).await {
            Ok(id) => id,
            Err(e) => {
                problems.push(e);
                continue;
            }
        };
        for endpoint in ENDPOINTS {
            let req = Request::get(uri(&id, endpoint, property))
                .body(Body::empty())
                .expect("request");
            let (status, body) = fetch(&app, req).await;
            if status != StatusCode::OK {
                problems.push(format!("{fixture} {endpoint}: status {status}"));
                continue;
            }
            let path = golden_path(fixture, endpoint);
            if update {
                fs::create_dir_all(path.parent().expect("parent")).expect("golden dir");
                fs::write(&path, &body).expect("write golden");
                continue;
            }
            match fs::read(&path) {
                Ok(want) if want == body => {}
                Ok(_) => problems.push(format!(
                    "{fixture} {endpoint}: response differs from {}",
                    path.display()
                )),
                Err(e) => problems.push(format!("{}: {e}", path.display())),
            }
        }
    }
    problems
}
