mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use common::*;
use serde_json::{json, Value};
use synopsviz_server::ServerConfig;

const EX: &str = "http://example.org/";

#[tokio::test]
async fn empty_registry_lists_nothing() {
    let app = app();
    let r = get(&app, "/datasets").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json(), json!([]));
}

#[tokio::test]
async fn upload_and_list() {
    let app = app();
    let small = upload_fixture(&app, "small.nt").await;
    upload_fixture(&app, "zoo.ttl").await;
    let list = get(&app, "/datasets").await.json();
    assert_eq!(list.as_array().unwrap().len(), 2);
    let entry = list
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["id"] == small.as_str())
        .unwrap();
    assert_eq!(entry["tripleCount"], 50);
    let stats = get(&app, &format!("/datasets/{small}/statistics"))
        .await
        .json();
    assert_eq!(stats["dataLevel"]["tripleCount"], entry["tripleCount"]);
    let report = get(&app, &format!("/datasets/{small}/report")).await.json();
    assert_eq!(report["skipped"], 3);
}

#[tokio::test]
async fn repeated_upload_returns_existing_id() {
    let app = app();
    let body = "<http://ex/a> <http://ex/p> <http://ex/b> .\n";
    let a = upload(&app, "x", "nt", body).await;
    let b = upload(&app, "x", "nt", body).await;
    assert_eq!((a.status, b.status), (StatusCode::CREATED, StatusCode::OK));
    assert_eq!(a.json()["id"], b.json()["id"]);
}

#[tokio::test]
async fn upload_errors() {
    let app = app();
    let r = upload(&app, "empty", "nt", "").await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "EmptyDataset");

    let r = upload(
        &app,
        "bad",
        "turtle",
        "@prefix ex: <http://ex/> .\nex:a ex:p \"open .\n",
    )
    .await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let body = r.json();
    assert_eq!(body["code"], "TurtleSyntaxError");
    assert!(body["detail"]["line"].as_u64().unwrap() >= 2);
    assert!(body["detail"]["column"].is_u64());

    let r = send(
        &app,
        Request::post("/datasets")
            .body(Body::from("<a> <b> <c> ."))
            .unwrap(),
    )
    .await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn size_caps_give_413() {
    let (app, _) = app_with(ServerConfig {
        max_triples: Some(5),
        ..ServerConfig::default()
    });
    let r = upload(
        &app,
        "small",
        "nt",
        std::fs::read(fixture_path("small.nt")).unwrap(),
    )
    .await;
    assert_eq!(r.status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(r.json()["code"], "TooManyTriples");

    let (app, _) = app_with(ServerConfig {
        max_upload_bytes: 64,
        ..ServerConfig::default()
    });
    let r = upload(
        &app,
        "small",
        "nt",
        std::fs::read(fixture_path("small.nt")).unwrap(),
    )
    .await;
    assert_eq!(r.status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(r.json()["code"], "PayloadTooLarge");
}

#[tokio::test]
async fn source_path_uploads_stay_in_the_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture_path("zoo.ttl"), dir.path().join("zoo.ttl")).unwrap();
    let (app, state) = app_with(ServerConfig {
        data_dir: Some(dir.path().to_path_buf()),
        ..ServerConfig::default()
    });
    // the loose file was loaded at startup
    assert_eq!(state.registry.len(), 1);
    let post = |body: Value| {
        Request::post("/datasets")
            .header("content-type", "application/json")
            .body(Body::from(body.to_string()))
            .unwrap()
    };
    let r = send(&app, post(json!({ "sourcePath": "zoo.ttl" }))).await;
    assert_eq!(
        r.status,
        StatusCode::OK,
        "{}",
        String::from_utf8_lossy(&r.bytes)
    );
    let r = send(&app, post(json!({ "sourcePath": "../../../etc/passwd" }))).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);

    let r = upload(
        &app,
        "extra",
        "nt",
        "<http://ex/a> <http://ex/p> <http://ex/b> .\n",
    )
    .await;
    assert_eq!(r.status, StatusCode::CREATED);
    let (_, reloaded) = app_with(ServerConfig {
        data_dir: Some(dir.path().to_path_buf()),
        ..ServerConfig::default()
    });
    assert_eq!(reloaded.registry.len(), 2);
}

#[tokio::test]
async fn unknown_dataset_is_404() {
    let app = app();
    for path in [
        "metadata",
        "statistics",
        "facets",
        "treemap",
        "schema",
        "hierarchy?property=x",
    ] {
        let r = get(&app, &format!("/datasets/nope/{path}")).await;
        assert_eq!(r.status, StatusCode::NOT_FOUND, "{path}");
        assert_eq!(r.json()["code"], "UnknownDataset");
    }
}

#[tokio::test]
async fn facets_and_metadata_documents() {
    let app = app();
    let countries = upload_fixture(&app, "countries.nt").await;
    let facets = get(&app, &format!("/datasets/{countries}/facets"))
        .await
        .json();
    assert_eq!(facets["propertyFacets"].as_array().unwrap().len(), 2);
    let void = upload_fixture(&app, "void-sample.ttl").await;
    let meta = get(&app, &format!("/datasets/{void}/metadata"))
        .await
        .json();
    assert_eq!(meta["entries"].as_array().unwrap().len(), 8);
    assert_eq!(meta["noMetadataFound"], false);
}

#[tokio::test]
async fn treemap_endpoint() {
    let app = app();
    let zoo = upload_fixture(&app, "zoo.ttl").await;
    let r = get(
        &app,
        &format!(
            "/datasets/{zoo}/treemap?root={}",
            enc(&format!("{EX}Animal"))
        ),
    )
    .await
    .json();
    assert_eq!(r["weight"], 5);
    assert_eq!(r["children"][0]["weight"], 3);
    let r = get(
        &app,
        &format!(
            "/datasets/{zoo}/treemap?root={}&depth=0",
            enc(&format!("{EX}Animal"))
        ),
    )
    .await
    .json();
    assert_eq!(r["children"], json!([]));
    assert_eq!(r["childCount"], 1);
    let r = get(&app, &format!("/datasets/{zoo}/treemap")).await.json();
    assert_eq!(r["classIri"], Value::Null);
    let r = get(
        &app,
        &format!("/datasets/{zoo}/treemap?root={}", enc("http://nope")),
    )
    .await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["code"], "UnknownClass");
    let r = get(
        &app,
        &format!("/datasets/{zoo}/classes?iri={}", enc(&format!("{EX}Dog"))),
    )
    .await
    .json();
    assert_eq!(r["transitiveInstanceCount"], 3);
}

#[tokio::test]
async fn hierarchy_drill_down() {
    let app = app();
    let id = upload_fixture(&app, "range10.nt").await;
    let uri = format!(
        "/datasets/{id}/hierarchy?property={}&strategy=equal-width&levels=1&fanout=2",
        enc(&format!("{EX}value"))
    );
    let first = get(&app, &uri).await;
    assert_eq!(first.status, StatusCode::OK);
    assert_eq!(first.cache.as_deref(), Some("miss"));
    let body = first.json();
    let children = body["children"].as_array().unwrap();
    assert_eq!(children.len(), 2);
    assert_eq!(
        (
            children[0]["range"]["lo"].clone(),
            children[0]["range"]["hi"].clone()
        ),
        (json!(1), json!(5.5))
    );
    assert_eq!(
        (
            children[1]["range"]["lo"].clone(),
            children[1]["range"]["hi"].clone()
        ),
        (json!(5.5), json!(10))
    );
    assert_eq!(children[0]["stats"]["count"], 5);
    assert_eq!(children[1]["stats"]["count"], 5);
    assert_eq!(children[1]["closure"], "closed");

    let second = get(&app, &uri).await;
    assert_eq!(second.cache.as_deref(), Some("hit"));
    assert_eq!(second.bytes, first.bytes);
    let token = body["treeToken"].as_str().unwrap();

    let kids = get(
        &app,
        &format!("/datasets/{id}/hierarchy/{token}/nodes/root/children"),
    )
    .await
    .json();
    assert_eq!(kids["children"], body["children"]);
    let leaf_kids = get(
        &app,
        &format!("/datasets/{id}/hierarchy/{token}/nodes/1/children"),
    )
    .await
    .json();
    assert_eq!(leaf_kids["children"], json!([]));

    let r = get(
        &app,
        &format!("/datasets/{id}/hierarchy/{token}/nodes/root/points"),
    )
    .await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.json()["code"], "NotALeaf");

    let mut seen = 0;
    for offset in [0, 2, 4] {
        let page = get(
            &app,
            &format!("/datasets/{id}/hierarchy/{token}/nodes/1/points?limit=2&offset={offset}"),
        )
        .await
        .json();
        assert_eq!(page["total"], 5);
        seen += page["points"].as_array().unwrap().len();
    }
    assert_eq!(seen, 5);
    let page = get(
        &app,
        &format!("/datasets/{id}/hierarchy/{token}/nodes/1/points"),
    )
    .await
    .json();
    let values: Vec<i64> = page["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["value"].as_i64().unwrap())
        .collect();
    assert_eq!(values, [6, 7, 8, 9, 10]);
    assert_eq!(page["limit"], 200);

    let r = get(
        &app,
        &format!("/datasets/{id}/hierarchy/{token}/nodes/9/children"),
    )
    .await;
    assert_eq!(
        (r.status, r.json()["code"].clone()),
        (StatusCode::NOT_FOUND, json!("UnknownNode"))
    );
    let r = get(
        &app,
        &format!("/datasets/{id}/hierarchy/deadbeef/nodes/root/children"),
    )
    .await;
    assert_eq!(
        (r.status, r.json()["code"].clone()),
        (StatusCode::NOT_FOUND, json!("UnknownToken"))
    );
}

#[tokio::test]
async fn hierarchy_errors() {
    let app = app();
    let id = upload_fixture(&app, "countries.nt").await;
    let h = |q: String| format!("/datasets/{id}/hierarchy?{q}");
    let cases = [
        (h(String::new()), StatusCode::BAD_REQUEST, "BadRequest"),
        (
            h(format!("property={}", enc("http://nope"))),
            StatusCode::BAD_REQUEST,
            "UnknownProperty",
        ),
        (
            h(format!(
                "property={}&classes={}",
                enc(&format!("{EX}population")),
                enc("http://nope")
            )),
            StatusCode::BAD_REQUEST,
            "UnknownClass",
        ),
        (
            h(format!(
                "property={}&fanout=0",
                enc(&format!("{EX}population"))
            )),
            StatusCode::BAD_REQUEST,
            "ConfigOutOfBounds",
        ),
        (
            h(format!(
                "property={}&levels=99",
                enc(&format!("{EX}population"))
            )),
            StatusCode::BAD_REQUEST,
            "ConfigOutOfBounds",
        ),
        (
            h(format!(
                "property={}&strategy=median",
                enc(&format!("{EX}population"))
            )),
            StatusCode::BAD_REQUEST,
            "ConfigOutOfBounds",
        ),
    ];
    for (uri, status, code) in cases {
        let r = get(&app, &uri).await;
        assert_eq!(
            (r.status, r.json()["code"].clone()),
            (status, json!(code)),
            "{uri}"
        );
    }
}

#[tokio::test]
async fn property_without_parseable_values_is_422() {
    let app = app();
    let nt = "<http://ex/a> <http://ex/n> \"1\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n\
              <http://ex/b> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex/C> .\n";
    let id = upload(&app, "x", "nt", nt).await.json()["id"]
        .as_str()
        .unwrap()
        .to_owned();
    let r = get(
        &app,
        &format!(
            "/datasets/{id}/hierarchy?property={}&classes={}",
            enc("http://ex/n"),
            enc("http://ex/C")
        ),
    )
    .await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "EmptyPointSet");
}

#[tokio::test]
async fn temporal_hierarchy_has_iso_ranges() {
    let app = app();
    let id = upload_fixture(&app, "countries.nt").await;
    let body = get(
        &app,
        &format!(
            "/datasets/{id}/hierarchy?property={}&levels=1&fanout=2",
            enc(&format!("{EX}founded"))
        ),
    )
    .await
    .json();
    assert_eq!(body["axis"], "temporal");
    assert_eq!(body["root"]["range"]["loIso"], "0843-08-10T00:00:00.000Z");
    assert!(body["root"]["range"]["lo"].is_i64());
}

#[tokio::test]
async fn cors_headers_are_sent() {
    let app = app();
    let req = Request::get("/datasets")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = tower::ServiceExt::oneshot(app, req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}
