//! The HTTP API. Without arguments this drives the router in-process and
//! prints each request and response; with `--serve PORT` it listens on
//! 127.0.0.1 instead.
//!
//! ```bash
//! cargo run --example api_server
//! cargo run --example api_server -- --serve 8080
//! curl -s localhost:8080/resources/M1/history
//! ```

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use ontomas::api::{router, AppState};
use ontomas::builder::{build_abox, parse_csv_bundle, read_bundle_dir};
use ontomas::kb::KnowledgeBase;
use ontomas::runtime::RESOURCE_HISTORY_QUERY;
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: &str, write: bool) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if !body.starts_with('{') && !body.is_empty() {
        req = req.header("content-type", "text/plain");
    } else {
        req = req.header("content-type", "application/json");
    }
    if write {
        req = req.header("x-write", "true");
    }
    let resp = app
        .clone()
        .oneshot(req.body(Body::from(body.to_string())).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8_lossy(&bytes).into_owned())
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/case_study");
    let mut kb = KnowledgeBase::new();
    build_abox(&mut kb, &parse_csv_bundle(&read_bundle_dir(&dir)?)?)?;

    let args: Vec<String> = std::env::args().collect();
    if let Some(port) = args.iter().position(|a| a == "--serve").and_then(|i| args.get(i + 1)) {
        let addr = format!("127.0.0.1:{port}").parse()?;
        println!("listening on http://{addr}");
        return Ok(ontomas::api::serve(kb, addr).await?);
    }

    let app = router(AppState::new(kb));
    let history = RESOURCE_HISTORY_QUERY.replace("<resource>", "ex:M3");
    let script: [(&str, &str, &str, bool); 10] = [
        (
            "POST",
            "/executions",
            r#"{"product":"part","plan":"P1@M3","plannedStart":"2023-01-01T00:02:00Z","plannedEnd":"2023-01-01T00:17:00Z","resource":"M3"}"#,
            false,
        ),
        (
            "PATCH",
            "/executions/exec_part_1",
            r#"{"status":"running","realStart":"2023-01-01T00:02:00Z"}"#,
            false,
        ),
        (
            "PATCH",
            "/executions/exec_part_1",
            r#"{"status":"successful","realEnd":"2023-01-01T00:17:00Z","realPerformance":{"durationMin":15,"energyKwh":120,"emissions":0,"quality":1}}"#,
            false,
        ),
        ("PATCH", "/executions/exec_part_1", r#"{"status":"running"}"#, false),
        ("GET", "/resources/M3/history?status=successful", "", false),
        ("POST", "/query", &history, false),
        (
            "POST",
            "/query",
            "PREFIX ex: <http://example.org/manufacturing#> INSERT DATA { ex:note ex:description \"hi\" }",
            false,
        ),
        (
            "PATCH",
            "/resources/M1/performance",
            r#"{"durationMin":18,"energyKwh":110.25}"#,
            false,
        ),
        ("GET", "/resources/M3/oee?start=0&end=30", "", false),
        ("GET", "/products/nope/status", "", false),
    ];
    for (method, uri, body, write) in script {
        let (status, text) = call(&app, method, uri, body, write).await;
        println!("{method} {uri}\n  -> {} {text}\n", status.as_u16());
    }
    Ok(())
}
