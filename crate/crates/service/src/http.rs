//! HTTP routes.
//!
//! Every JSON body, including errors, carries `"schema": "ortkit/1"`.
//! Annotator endpoints take the session token as `?token=` or as a bearer
//! token; `/api/export` takes the admin token the same way.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ortkit::ingest::{self, SCHEMA_VERSION};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{DocumentSubmission, SegmentSubmission, Service, ServiceError, TimeSubmission};

type Params = Query<HashMap<String, String>>;

fn with_schema<T: Serialize>(body: &T) -> Value {
    let mut v = serde_json::to_value(body).expect("response serializes");
    match v.as_object_mut() {
        Some(map) => {
            map.insert("schema".into(), json!(SCHEMA_VERSION));
            v
        }
        None => json!({ "schema": SCHEMA_VERSION, "data": v }),
    }
}

fn ok<T: Serialize>(body: &T) -> Response {
    Json(with_schema(body)).into_response()
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, code) = match &self {
            ServiceError::Unauthorized => (StatusCode::UNAUTHORIZED, "Unauthorized"),
            ServiceError::ValidationFailed { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "ValidationFailed"),
            ServiceError::NotFound(_) => (StatusCode::NOT_FOUND, "NotFound"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "Internal"),
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            log::error!("{self}");
        }
        let mut error = json!({ "code": code, "message": self.to_string() });
        if let ServiceError::ValidationFailed { field, code, .. } = &self {
            error["field"] = json!(field);
            error["reason"] = json!(code);
        }
        (status, Json(json!({ "schema": SCHEMA_VERSION, "error": error }))).into_response()
    }
}

fn bad_request(message: String) -> Response {
    let body = json!({
        "schema": SCHEMA_VERSION,
        "error": { "code": "BadRequest", "message": message },
    });
    (StatusCode::BAD_REQUEST, Json(body)).into_response()
}

fn token<'a>(params: &'a HashMap<String, String>, headers: &'a HeaderMap) -> Option<&'a str> {
    params.get("token").map(String::as_str).or_else(|| {
        headers
            .get(header::AUTHORIZATION)
            .and_then(|h| h.to_str().ok())
            .and_then(|h| h.strip_prefix("Bearer "))
    })
}

/// Parses a JSON body by hand so that malformed input gets the same error
/// envelope as everything else.
fn body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, Response> {
    serde_json::from_slice(bytes).map_err(|e| bad_request(format!("invalid request body: {e}")))
}

async fn meta(State(svc): State<Arc<Service>>) -> Response {
    ok(&svc.meta())
}

async fn document(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    Query(params): Params,
    headers: HeaderMap,
) -> Response {
    let result = svc
        .authenticate(token(&params, &headers))
        .and_then(|annotator| svc.document_view(&annotator, &id));
    match result {
        Ok(view) => ok(&view),
        Err(e) => e.into_response(),
    }
}

async fn submit_segment(
    State(svc): State<Arc<Service>>,
    Query(params): Params,
    headers: HeaderMap,
    bytes: axum::body::Bytes,
) -> Response {
    let annotator = match svc.authenticate(token(&params, &headers)) {
        Ok(a) => a,
        Err(e) => return e.into_response(),
    };
    let sub: SegmentSubmission = match body(&bytes) {
        Ok(s) => s,
        Err(r) => return r,
    };
    match svc.submit_segment(&annotator, &sub) {
        Ok(ack) => ok(&ack),
        Err(e) => e.into_response(),
    }
}

async fn submit_document(
    State(svc): State<Arc<Service>>,
    Query(params): Params,
    headers: HeaderMap,
    bytes: axum::body::Bytes,
) -> Response {
    let annotator = match svc.authenticate(token(&params, &headers)) {
        Ok(a) => a,
        Err(e) => return e.into_response(),
    };
    let sub: DocumentSubmission = match body(&bytes) {
        Ok(s) => s,
        Err(r) => return r,
    };
    match svc.submit_document(&annotator, &sub) {
        Ok(ack) => ok(&ack),
        Err(e) => e.into_response(),
    }
}

async fn log_time(
    State(svc): State<Arc<Service>>,
    Query(params): Params,
    headers: HeaderMap,
    bytes: axum::body::Bytes,
) -> Response {
    let annotator = match svc.authenticate(token(&params, &headers)) {
        Ok(a) => a,
        Err(e) => return e.into_response(),
    };
    let sub: TimeSubmission = match body(&bytes) {
        Ok(s) => s,
        Err(r) => return r,
    };
    match svc.log_time(&annotator, &sub) {
        Ok(ack) => ok(&ack),
        Err(e) => e.into_response(),
    }
}

async fn progress(State(svc): State<Arc<Service>>, Query(params): Params, headers: HeaderMap) -> Response {
    let tok = token(&params, &headers);
    if tok.is_some_and(|t| svc.is_admin(t)) {
        return ok(&svc.progress(None));
    }
    match svc.authenticate(tok) {
        Ok(a) => ok(&svc.progress(Some(&a))),
        Err(e) => e.into_response(),
    }
}

async fn export(State(svc): State<Arc<Service>>, Query(params): Params, headers: HeaderMap) -> Response {
    if !token(&params, &headers).is_some_and(|t| svc.is_admin(t)) {
        return ServiceError::Unauthorized.into_response();
    }
    let bytes = ingest::to_canonical_json(&svc.export());
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/api/campaign/meta", get(meta))
        .route("/api/documents/{id}", get(document))
        .route("/api/annotations/segment", post(submit_segment))
        .route("/api/annotations/document", post(submit_document))
        .route("/api/time", post(log_time))
        .route("/api/progress", get(progress))
        .route("/api/export", get(export))
        .with_state(svc)
}

/// Serves until the process is stopped. Returns an error if the address
/// cannot be bound.
pub async fn serve(svc: Arc<Service>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(svc)).await
}
