//! Drive the HTTP gateway in-process: create a session, filter, focus and
//! follow, then commit an import. `panoptica serve` exposes the same router
//! on a TCP port.
//!
//! Run with `cargo run --example http_gateway`.

use axum::body::Body;
use axum::http::{Method, Request};
use http_body_util::BodyExt;
use panoptica::demo;
use panoptica::gateway::{router, AppState};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: Method, uri: &str, body: Option<serde_json::Value>) -> (u16, String) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status().as_u16();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8_lossy(&bytes).into_owned())
}

fn short(s: &str) -> &str {
    &s[..s.len().min(160)]
}

#[tokio::main]
async fn main() {
    let app = router(AppState::in_memory(demo::opera_store()));

    let (status, body) = call(&app, Method::GET, "/classes", None).await;
    println!("GET /classes -> {status} {}", short(&body));

    let (_, body) = call(&app, Method::POST, "/sessions", None).await;
    let token = serde_json::from_str::<serde_json::Value>(&body).unwrap()["token"]
        .as_str()
        .unwrap()
        .to_string();
    println!("session {token}");

    let filter = serde_json::json!({"class": "Roles", "clauses": [{"attribute": "name", "contains": "Cio"}]});
    let (status, _) = call(&app, Method::PUT, &format!("/sessions/{token}/filter"), Some(filter)).await;
    println!("PUT filter -> {status}");

    let (status, body) = call(&app, Method::GET, &format!("/objects/8/view?session={token}"), None).await;
    let view: serde_json::Value = serde_json::from_str(&body).unwrap();
    println!("GET /objects/8/view -> {status}, focus {}", view["focus"]["label"]);
    for group in view["d4"].as_array().unwrap() {
        let members: Vec<_> = group["members"].as_array().unwrap().iter().map(|m| m["label"].clone()).collect();
        println!("  {} via {}: {:?}", group["class"], group["via_attribute"], members);
    }

    let follow = serde_json::json!({"from": 8, "member": 13});
    let (status, body) = call(&app, Method::POST, &format!("/sessions/{token}/follow"), Some(follow)).await;
    let view: serde_json::Value = serde_json::from_str(&body).unwrap();
    println!("POST follow -> {status}, focus {}", view["focus"]["label"]);

    let bad = serde_json::json!({"class": "Roles", "values": {"name": "Goro", "opera": 999}});
    let (status, body) = call(&app, Method::POST, "/objects", Some(bad)).await;
    println!("POST /objects with dangling link -> {status} {body}");

    let commit = serde_json::json!({
        "mapping": {"class": "Roles", "column_map": {"name": "name", "opera": "opera"}},
        "source": "name,opera\nSuzuki,Madame Butterfly\nGhost,Nowhere\n"
    });
    let (status, body) = call(&app, Method::POST, "/import/commit", Some(commit)).await;
    println!("POST /import/commit -> {status} {body}");

    let (status, body) = call(&app, Method::GET, "/reports/list?class=Opera%20Works&columns=title&format=csv", None).await;
    println!("GET /reports/list -> {status}\n{body}");
}
