//! HTTP API: upload a CSV, bin a field, refine edited edges.
//!
//! Datasets live in memory only and are lost on restart.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use binsmith_core::engine::{BinRequest, Engine, RefineRequest};
use binsmith_core::{parse_csv, profile, CsvOptions, Error, SeriesProfile, Table};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub struct AppState {
    engine: Engine,
    datasets: RwLock<HashMap<String, Arc<Table>>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(engine: Engine) -> AppState {
        AppState {
            engine,
            datasets: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    fn insert(&self, table: Table) -> String {
        let id = format!("ds{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        self.datasets
            .write()
            .expect("dataset store poisoned")
            .insert(id.clone(), Arc::new(table));
        id
    }

    fn get(&self, id: &str) -> Result<Arc<Table>, ApiError> {
        self.datasets
            .read()
            .expect("dataset store poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown dataset {id:?}")))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> ApiError {
        let status = match &e {
            Error::FieldNotFound(_) => StatusCode::NOT_FOUND,
            Error::Parse { .. } | Error::Encoding(_) | Error::DuplicateColumn(_) | Error::EmptyInput | Error::Json(_) => {
                StatusCode::BAD_REQUEST
            }
            Error::InvalidScheme(_)
            | Error::InvalidValue(_)
            | Error::InvalidConfig(_)
            | Error::InvalidGrain(_)
            | Error::NonNumeric(_)
            | Error::EmptyColumn(_)
            | Error::NoSemanticMatch(_)
            | Error::DegenerateSpread(_)
            | Error::TooFew { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

/// Body parsing that reports every malformed payload as 400.
fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed request: {e}")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FieldSummary {
    pub name: String,
    pub numeric: bool,
    pub profile: Option<SeriesProfile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetResponse {
    pub id: String,
    pub rows: usize,
    pub fields: Vec<FieldSummary>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetBinRequest {
    pub dataset: String,
    #[serde(flatten)]
    pub request: BinRequest,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetRefineRequest {
    pub dataset: String,
    #[serde(flatten)]
    pub request: RefineRequest,
}

async fn upload(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let table = parse_csv(&body, CsvOptions::default())?;
    let fields = table
        .columns
        .iter()
        .map(|c| {
            let numeric = c.is_numeric();
            let profile = if numeric { c.numeric().ok().and_then(|v| profile(&v).ok()) } else { None };
            FieldSummary {
                name: c.name.clone(),
                numeric,
                profile,
            }
        })
        .collect();
    let rows = table.rows();
    let id = state.insert(table);
    Ok((StatusCode::CREATED, Json(DatasetResponse { id, rows, fields })).into_response())
}

async fn bin(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: DatasetBinRequest = parse_body(&body)?;
    let table = state.get(&req.dataset)?;
    let column = table.numeric_column(&req.request.field)?;
    Ok(Json(state.engine.bin(&column, &req.request)?).into_response())
}

async fn refine(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: DatasetRefineRequest = parse_body(&body)?;
    let table = state.get(&req.dataset)?;
    let column = table.numeric_column(&req.request.field)?;
    Ok(Json(state.engine.refine(&column, &req.request)?).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/dataset", post(upload))
        .route("/api/bin", post(bin))
        .route("/api/refine", post(refine))
        .with_state(state)
}

pub async fn serve(addr: &str, engine: Engine) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    println!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(AppState::new(engine)))).await
}
