mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use ortkit::ingest;
use ortkit::model::Category;
use ortkit_service::http::router;
use ortkit_service::Service;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::{fresh_campaign, ratings};

struct Fixture {
    _dir: tempfile::TempDir,
    svc: Arc<Service>,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let svc = Arc::new(Service::init(dir.path(), fresh_campaign(), "secret").unwrap());
        Fixture { _dir: dir, svc }
    }

    fn token(&self, annotator: &str) -> String {
        self.svc.tokens()[annotator].clone()
    }

    async fn call(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
        let req = Request::builder().method(method).uri(uri);
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(serde_json::to_vec(&b).unwrap())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = router(self.svc.clone()).oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        (status, bytes)
    }

    async fn json(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let (status, bytes) = self.call(method, uri, body).await;
        (status, serde_json::from_slice(&bytes).unwrap())
    }
}

#[tokio::test]
async fn meta_carries_schema_and_columns() {
    let f = Fixture::new();
    let (status, v) = f.json("GET", "/api/campaign/meta", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["schema"], "ortkit/1");
    assert_eq!(v["columns"], 4);
    assert_eq!(v["categories"].as_array().unwrap().len(), 7);
    assert_eq!(v["documents"], json!(["d01", "d02"]));
}

#[tokio::test]
async fn document_view_hides_sources() {
    let f = Fixture::new();
    let (status, v) = f.json("GET", "/api/documents/d01", None).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    assert_eq!(v["schema"], "ortkit/1");
    assert_eq!(v["error"]["code"], "Unauthorized");

    let tok = f.token("A01");
    let (status, v) = f.json("GET", &format!("/api/documents/d01?token={tok}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["schema"], "ortkit/1");
    let text = v.to_string();
    for id in ["\"N1\"", "\"P1\"", "\"P2\"", "\"P3\""] {
        assert!(!text.contains(id), "source id {id} leaked");
    }
    let columns = v["columns"].as_array().unwrap();
    assert_eq!(columns.len(), 4);
    for (i, col) in columns.iter().enumerate() {
        assert_eq!(col["position"], i);
        assert_eq!(col["hypotheses"].as_array().unwrap().len(), 8);
    }

    // column order is stable across reloads
    let (_, again) = f.json("GET", &format!("/api/documents/d01?token={tok}"), None).await;
    assert_eq!(v["columns"], again["columns"]);

    let (status, v) = f.json("GET", &format!("/api/documents/nope?token={tok}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "NotFound");
}

#[tokio::test]
async fn bearer_header_is_accepted() {
    let f = Fixture::new();
    let req = Request::builder()
        .uri("/api/progress")
        .header("authorization", format!("Bearer {}", f.token("A02")))
        .body(Body::empty())
        .unwrap();
    let resp = router(f.svc.clone()).oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
}

#[tokio::test]
async fn valid_submission_is_exported() {
    let f = Fixture::new();
    let tok = f.token("A01");
    let (_, view) = f.json("GET", &format!("/api/documents/d01?token={tok}"), None).await;
    let start = view["evaluated_start"].as_u64().unwrap();
    let original = view["columns"][1]["hypotheses"][0].as_str().unwrap().to_string();

    let body = json!({
        "document_id": "d01",
        "segment_index": start,
        "column": 1,
        "ratings": ratings(5.8),
        "edited_text": format!("{original} opraveno"),
    });
    let (status, ack) = f.json("POST", &format!("/api/annotations/segment?token={tok}"), Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{ack}");
    assert_eq!(ack["schema"], "ortkit/1");
    assert_eq!(ack["sequence"], 1);

    let (status, bytes) = f.call("GET", "/api/export", None).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED, "{}", String::from_utf8_lossy(&bytes));
    let (status, bytes) = f.call("GET", &format!("/api/export?token={tok}"), None).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED, "{}", String::from_utf8_lossy(&bytes));

    let (status, bytes) = f.call("GET", "/api/export?token=secret", None).await;
    assert_eq!(status, StatusCode::OK);
    let exported = ingest::parse_canonical(std::str::from_utf8(&bytes).unwrap()).unwrap();
    assert_eq!(exported.segment_annotations.len(), 1);
    let a = &exported.segment_annotations[0];
    assert_eq!(a.annotator_id, "A01");
    assert_eq!(a.ratings.get(Category::Overall), Some(5.8));
    assert_eq!(a.edited_text, format!("{original} opraveno"));
    // the admin export maps the position back to the source shown there
    let hyp = exported.hypothesis("d01", &a.source_id, a.segment_index).unwrap();
    assert_eq!(hyp, original);

    // reload restores the answer at the same position
    let (_, view) = f.json("GET", &format!("/api/documents/d01?token={tok}"), None).await;
    assert_eq!(view["segment_answers"][0]["column"], 1);
    assert_eq!(view["segment_answers"][0]["ratings"]["overall"], 5.8);
}

#[tokio::test]
async fn invalid_submissions_are_rejected() {
    let f = Fixture::new();
    let tok = f.token("A01");
    let uri = format!("/api/annotations/segment?token={tok}");
    let mut r = ratings(5.0);
    r.insert("meaning".into(), json!(6.05));
    let body = json!({ "document_id": "d01", "segment_index": 2, "column": 0, "ratings": r });
    let (status, v) = f.json("POST", &uri, Some(body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["schema"], "ortkit/1");
    assert_eq!(v["error"]["code"], "ValidationFailed");
    assert_eq!(v["error"]["field"], "ratings.meaning");
    assert_eq!(v["error"]["reason"], "GranularityViolation");

    let body = json!({ "document_id": "d99", "segment_index": 2, "column": 0, "ratings": ratings(5.0) });
    let (status, v) = f.json("POST", &uri, Some(body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["field"], "document_id");

    let body = json!({ "document_id": "d01", "segment_index": 0, "column": 0, "ratings": ratings(5.0) });
    let (status, v) = f.json("POST", &uri, Some(body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["field"], "segment_index");

    let body = json!({ "document_id": "d01", "segment_index": 2, "column": 4, "ratings": ratings(5.0) });
    let (status, v) = f.json("POST", &uri, Some(body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["field"], "column");

    let mut r = ratings(5.0);
    r.insert("style".into(), json!("five"));
    let body = json!({ "document_id": "d01", "segment_index": 2, "column": 0, "ratings": r });
    let (status, v) = f.json("POST", &uri, Some(body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["reason"], "NotANumber");

    let (status, v) = f.json("POST", &uri, Some(json!({ "nonsense": true }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["schema"], "ortkit/1");

    let body = json!({ "document_id": "d01", "segment_index": 2, "column": 0, "ratings": ratings(5.0) });
    let (status, _) = f.json("POST", "/api/annotations/segment?token=forged", Some(body)).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);

    assert_eq!(f.svc.last_sequence(), 0);
    assert!(f.svc.export().segment_annotations.is_empty());
}

async fn progress_of(f: &Fixture, tok: &str, doc: &str) -> Value {
    let (status, v) = f.json("GET", &format!("/api/progress?token={tok}"), None).await;
    assert_eq!(status, StatusCode::OK);
    v["documents"]
        .as_array()
        .unwrap()
        .iter()
        .find(|d| d["document_id"] == doc)
        .unwrap()
        .clone()
}

#[tokio::test]
async fn progress_counts_cells_and_time() {
    let f = Fixture::new();
    let (status, _) = f.json("GET", "/api/progress", None).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);

    let tok = f.token("A05");
    let (_, v) = f.json("GET", &format!("/api/progress?token={tok}"), None).await;
    let docs = v["documents"].as_array().unwrap();
    assert_eq!(docs.len(), 2);
    for d in docs {
        assert_eq!(d["annotator_id"], "A05");
        assert_eq!(d["fraction"], 0.0);
        assert_eq!(d["document_fraction"], 0.0);
        assert_eq!(d["complete"], false);
    }

    let seg = |i: usize, col: usize| {
        json!({ "document_id": "d01", "segment_index": i, "column": col, "ratings": ratings(4.0) })
    };
    let seg_uri = format!("/api/annotations/segment?token={tok}");
    let (status, _) = f.json("POST", &seg_uri, Some(seg(2, 0))).await;
    assert_eq!(status, StatusCode::OK);
    let p = progress_of(&f, &tok, "d01").await;
    assert_eq!(p["fraction"].as_f64().unwrap(), 1.0 / 32.0);

    for i in 2..10 {
        for col in 0..4 {
            f.json("POST", &seg_uri, Some(seg(i, col))).await;
        }
    }
    let p = progress_of(&f, &tok, "d01").await;
    assert_eq!(p["fraction"].as_f64().unwrap(), 1.0);
    assert_eq!(p["complete"], false);

    let doc_uri = format!("/api/annotations/document?token={tok}");
    for col in 0..4 {
        let body = json!({ "document_id": "d01", "column": col, "ratings": ratings(4.5) });
        let (status, _) = f.json("POST", &doc_uri, Some(body)).await;
        assert_eq!(status, StatusCode::OK);
    }
    let time_uri = format!("/api/time?token={tok}");
    for m in [12.5, 3.0] {
        let (status, _) = f.json("POST", &time_uri, Some(json!({ "document_id": "d01", "minutes": m }))).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (status, _) = f.json("POST", &time_uri, Some(json!({ "document_id": "d01", "minutes": -1.0 }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let p = progress_of(&f, &tok, "d01").await;
    assert_eq!(p["fraction"].as_f64().unwrap(), 1.0);
    assert_eq!(p["document_fraction"].as_f64().unwrap(), 1.0);
    assert_eq!(p["complete"], true);
    assert_eq!(p["minutes_spent"].as_f64().unwrap(), 15.5);
    let other = progress_of(&f, &tok, "d02").await;
    assert_eq!(other["fraction"], 0.0);

    // admin sees every annotator
    let (_, all) = f.json("GET", "/api/progress?token=secret", None).await;
    assert_eq!(all["documents"].as_array().unwrap().len(), 22);

    let exported = f.svc.export();
    let report = ortkit::model::validate_campaign(&exported);
    assert!(report.is_valid(), "{:?}", report.errors);
    let docs: Vec<_> = exported.document_annotations.iter().filter(|d| d.annotator_id == "A05").collect();
    assert_eq!(docs.len(), 4);
    assert!(docs.iter().all(|d| d.minutes_spent == Some(15.5)));
}
