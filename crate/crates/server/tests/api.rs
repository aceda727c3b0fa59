use std::io::{Read, Write};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use kwsearch_server::{router, AppState};
use kwsearch_testkit::oracle::{brute_eval, MemoryDb};
use kwsearch_testkit::{club, university, Fixture};
use serde_json::Value;
use tower::ServiceExt;

fn app(fixture: &Fixture) -> Router {
    let h = fixture.harness();
    router(Arc::new(AppState {
        searcher: h.searcher,
        assets: None,
    }))
}

async fn get(app: &Router, uri: &str) -> (StatusCode, String, String) {
    let resp = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let ct = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_owned())
        .unwrap_or_default();
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    (status, ct, String::from_utf8(body.to_vec()).unwrap())
}

async fn get_json(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (s, ct, body) = get(app, uri).await;
    assert!(ct.starts_with("application/json"), "{uri}: {ct}");
    (
        s,
        serde_json::from_str(&body).unwrap_or_else(|e| panic!("{uri}: {e}: {body}")),
    )
}

fn links(doc: &Value) -> Vec<String> {
    let mut out = Vec::new();
    for f in doc["frames"].as_array().unwrap() {
        for l in f["links"].as_array().unwrap() {
            out.push(l["href"].as_str().unwrap().to_owned());
        }
    }
    out
}

fn well_formed(doc: &Value) -> bool {
    doc["frames"].as_array().is_some_and(|frames| {
        frames.iter().all(|f| {
            let width = f["columns"].as_array().map(Vec::len);
            f["rows"]
                .as_array()
                .is_some_and(|rows| rows.iter().all(|r| r.as_array().map(Vec::len) == width))
        })
    }) && doc["diagnostics"].is_array()
}

#[tokio::test]
async fn john_reads_two_ways() {
    let fx = club();
    let app = app(&fx);
    let (s, doc) = get_json(&app, "/api/search?q=John&interp=all").await;
    assert_eq!(s, StatusCode::OK);
    let groups = doc["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 2);
    let member = &groups[0]["frames"][0];
    assert_eq!(member["relation"], "Member");
    assert_eq!(member["rows"], serde_json::json!([["John", "BO-3492", 15]]));
    let kinds: Vec<(&str, &str)> = member["links"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| (l["kind"].as_str().unwrap(), l["target_table"].as_str().unwrap()))
        .collect();
    assert_eq!(kinds, [("fk_cell", "City"), ("drill_line", "Activity")]);
    let activity = &groups[1]["frames"][0];
    assert_eq!(activity["relation"], "Activity");
    assert_eq!(activity["rows"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn best_reading_is_the_default() {
    let fx = club();
    let app = app(&fx);
    let (s, doc) = get_json(&app, "/api/search?q=John").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(doc["frames"].as_array().unwrap().len(), 1);
    assert_eq!(doc["frames"][0]["relation"], "Member");
    assert_eq!(doc["interpretation"]["class"], "single_relation");
}

#[tokio::test]
async fn request_errors_are_structured() {
    let fx = club();
    let app = app(&fx);
    let (s, e) = get_json(&app, "/api/search?q=").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "invalid_request");
    assert!(e["message"].is_string());
    let (s, e) = get_json(&app, "/api/search").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "invalid_request");
    let (s, e) = get_json(&app, "/api/search?q=Zanzibar").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "unmappable_keyword");
    assert_eq!(e["detail"]["keyword"], "Zanzibar");
    assert_eq!(e["detail"]["policy"], "reject");
    let (s, e) = get_json(&app, "/api/search?q=John&limit=0").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "invalid_request");
    let (s, _) = get_json(&app, "/api/search?q=John&limit=1001").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = get_json(&app, "/api/search?q=John&rank=loudest").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, e) = get_json(&app, "/api/search?q=John%20AND").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "syntax_error");
    let (s, e) = get_json(&app, "/api/row/Nowhere?x=1").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(e["code"], "unknown_table");
    let (s, e) = get_json(&app, "/api/row/City?Colour=red").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(e["code"], "unknown_column");
    let (s, _) = get_json(&app, "/api/related/Activity/9?Name=John").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = get_json(&app, "/api/nothing").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn unrelated_relations_name_the_pair() {
    let fx = university();
    let app = app(&fx);
    let (s, e) = get_json(&app, "/api/search?q=Databases%20Sudarshan").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "unrelated_relations");
    assert_eq!(e["detail"]["pair"], serde_json::json!(["Course", "Faculty"]));
}

#[tokio::test]
async fn drill_endpoints() {
    let fx = club();
    let app = app(&fx);
    let (s, doc) = get_json(&app, "/api/row/City?Code=BO-3492").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(doc["frames"][0]["rows"], serde_json::json!([["BO-3492", "Illinois"]]));
    let (s, doc) = get_json(&app, "/api/related/Activity/1?Name=John").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(
        doc["frames"][0]["rows"],
        serde_json::json!([["John", "Biking"], ["John", "Running"]])
    );
    let (s, doc) = get_json(&app, "/api/row/City?Code=XX-0000").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(doc["frames"][0]["rows"], serde_json::json!([]));
    assert_eq!(doc["diagnostics"], serde_json::json!(["no rows matched"]));
    let (s, doc) = get_json(&app, "/api/related/Activity/1?Name=John&_limit=1&_offset=1").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(doc["frames"][0]["rows"], serde_json::json!([["John", "Running"]]));
    assert_eq!(doc["frames"][0]["total_rows"], 2);
    assert_eq!(doc["frames"][0]["offset"], 1);
    let (s, _) = get_json(&app, "/api/related/Activity/1?Sport=Running").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn schema_and_browse() {
    let fx = club();
    let app = app(&fx);
    let (s, doc) = get_json(&app, "/api/schema").await;
    assert_eq!(s, StatusCode::OK);
    let names: Vec<&str> = doc["tables"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["Activity", "City", "Member"]);
    assert_eq!(doc["tables"][0]["foreign_keys"][0]["references"], "Member");
    let (s, doc) = get_json(&app, "/api/tables/Member?limit=2&offset=1").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(doc["frames"][0]["total_rows"], 4);
    assert_eq!(doc["frames"][0]["rows"].as_array().unwrap().len(), 2);
    assert_eq!(doc["frames"][0]["rows"][0][0], "Mary");
    let (s, _) = get_json(&app, "/api/tables/Member?colour=red").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn html_pages_link_back_as_html() {
    let fx = club();
    let app = app(&fx);
    let (s, ct, body) = get(&app, "/api/search?q=John&format=html").await;
    assert_eq!(s, StatusCode::OK);
    assert!(ct.starts_with("text/html"));
    assert!(
        body.contains("href=\"/api/row/City?Code=BO-3492&amp;_format=html\""),
        "{body}"
    );
    assert!(body.contains("All Activity information"));
    let (s, ct, _) = get(&app, "/api/row/City?Code=BO-3492&_format=html").await;
    assert_eq!(s, StatusCode::OK);
    assert!(ct.starts_with("text/html"));
    let (s, ct, body) = get(&app, "/").await;
    assert_eq!(s, StatusCode::OK);
    assert!(ct.starts_with("text/html"));
    assert!(body.contains("/api/search"));
}

#[tokio::test]
async fn link_crawl_to_depth_two() {
    let fx = club();
    let app = app(&fx);
    let (_, seed) = get_json(&app, "/api/search?q=John&interp=all").await;
    let mut frontier: Vec<String> = seed["groups"].as_array().unwrap().iter().flat_map(links).collect();
    assert!(!frontier.is_empty());
    let mut visited = 0;
    let mut errors = Vec::new();
    for _depth in 0..2 {
        let mut next = Vec::new();
        for href in frontier {
            let (s, doc) = get_json(&app, &href).await;
            visited += 1;
            if s != StatusCode::OK || !well_formed(&doc) {
                errors.push(format!("{href}: {s} {doc}"));
                continue;
            }
            next.extend(links(&doc));
        }
        frontier = next;
    }
    assert!(errors.is_empty(), "{errors:#?}");
    assert!(visited >= 3);
}

#[tokio::test]
async fn responses_do_not_depend_on_request_order() {
    let fx = club();
    let app = app(&fx);
    let uris = [
        "/api/search?q=John&interp=all",
        "/api/row/City?Code=AT-1170",
        "/api/search?q=Illinois&rank=fk_count",
        "/api/related/Member/1?City=BO-3492",
    ];
    let mut first = Vec::new();
    for u in uris {
        first.push(get(&app, u).await);
    }
    for (i, u) in uris.iter().enumerate().rev() {
        assert_eq!(get(&app, u).await, first[i]);
    }
}

#[tokio::test]
async fn running_illinois_matches_oracle() {
    let fx = club();
    let h = fx.harness();
    let interp = h.searcher.interpretations("running Illinois").unwrap().remove(0).0;
    let db = MemoryDb::load(h.searcher.gateway(), h.searcher.catalog());
    let expected = brute_eval(&db, &interp, 3).unwrap();
    let app = router(Arc::new(AppState {
        searcher: h.searcher,
        assets: None,
    }));
    let (s, doc) = get_json(&app, "/api/search?q=running%20Illinois&rank=none").await;
    assert_eq!(s, StatusCode::OK);
    let frames = doc["frames"].as_array().unwrap();
    assert_eq!(frames.len(), expected.len());
    for f in frames {
        let t = db
            .catalog
            .table_by_name(f["relation"].as_str().unwrap())
            .unwrap()
            .table_id;
        let got: Vec<Value> = f["rows"].as_array().unwrap().clone();
        let want: Vec<Value> = expected[&t].iter().map(|r| serde_json::to_value(r).unwrap()).collect();
        let (mut got, mut want) = (got, want);
        got.sort_by_key(|v| v.to_string());
        want.sort_by_key(|v| v.to_string());
        assert_eq!(got, want, "{}", f["relation"]);
    }
    // John and Peter run, and both live in Illinois
    let member_or_activity: Vec<&str> = frames.iter().map(|f| f["relation"].as_str().unwrap()).collect();
    assert_eq!(member_or_activity, ["Activity", "City"]);
}

#[test]
fn serves_over_a_real_socket() {
    let fx = club();
    let h = fx.harness();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    let app = router(Arc::new(AppState {
        searcher: h.searcher,
        assets: None,
    }));
    rt.spawn(async move { axum::serve(listener, app).await.unwrap() });
    let mut stream = std::net::TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "GET /api/search?q=Georgia HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("AT-1170"));
}
