use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use crate::compiler::{compile, export_bn, BayesianNetwork};
use crate::error::Error;
use crate::inference::DEFAULT_SAMPLES;
use crate::kgmodel::KnowledgeBase;
use crate::observations::ObservationRecord;
use crate::service::{self, InferOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub port: u16,
    pub kb_path: PathBuf,
    pub default_samples: usize,
    pub cors_allowed: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: 8080,
            kb_path: PathBuf::new(),
            default_samples: DEFAULT_SAMPLES,
            cors_allowed: false,
        }
    }
}

/// The loaded knowledge base and everything derived from it. Replaced as a
/// whole on reload.
pub struct Snapshot {
    pub kb: KnowledgeBase,
    pub bn: BayesianNetwork,
    pub bn_json: String,
    pub model: Value,
}

impl Snapshot {
    pub fn from_text(text: &str) -> Result<Self, Error> {
        let (kb, _) = service::load_kb(text)?;
        let bn = compile(&kb)?;
        Ok(Snapshot {
            bn_json: export_bn(&bn),
            model: service::model_json(&kb, &bn)?,
            kb,
            bn,
        })
    }
}

pub struct AppState {
    config: ServiceConfig,
    snapshot: RwLock<Arc<Snapshot>>,
}

impl AppState {
    /// Reads and compiles the knowledge base named by the config.
    pub fn load(config: ServiceConfig) -> Result<Arc<Self>, Error> {
        let text = read_kb(&config)?;
        Self::from_text(config, &text)
    }

    pub fn from_text(config: ServiceConfig, text: &str) -> Result<Arc<Self>, Error> {
        Ok(Arc::new(AppState {
            snapshot: RwLock::new(Arc::new(Snapshot::from_text(text)?)),
            config,
        }))
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn replace(&self, snapshot: Snapshot) {
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(snapshot);
    }
}

fn read_kb(config: &ServiceConfig) -> Result<String, Error> {
    std::fs::read_to_string(&config.kb_path).map_err(|e| {
        Error::Io(format!("cannot read {}: {e}", config.kb_path.display()))
    })
}

struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl ToString) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "bad-request".into(),
            message: message.to_string(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::ZeroWeight | Error::ZeroProbability => StatusCode::CONFLICT,
            Error::UnknownId { .. }
            | Error::ConflictingEvidence { .. }
            | Error::RecompileNeeded { .. }
            | Error::NetworkTooLarge { .. }
            | Error::InvalidObservations(_)
            | Error::InvalidArgument(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            code: e.code().into(),
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, axum::Json(body)).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn json_text(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    let text = if body.iter().all(u8::is_ascii_whitespace) {
        "{}"
    } else {
        std::str::from_utf8(body).map_err(ApiError::bad_request)?
    };
    serde_json::from_str(text).map_err(ApiError::bad_request)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InferBody {
    #[serde(default)]
    observations: Vec<ObservationRecord>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    exact: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateBody {
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    forced: BTreeMap<String, bool>,
}

async fn healthz() -> Response {
    axum::Json(json!({"status": "ok"})).into_response()
}

async fn model(State(state): State<Arc<AppState>>) -> Response {
    axum::Json(state.snapshot().model.clone()).into_response()
}

async fn bn(State(state): State<Arc<AppState>>) -> Response {
    json_text(state.snapshot().bn_json.clone())
}

async fn infer(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let body: InferBody = parse_body(&body)?;
    let options = InferOptions {
        samples: Some(body.samples.unwrap_or(state.config.default_samples)),
        seed: body.seed,
        exact: body.exact,
        workers: None,
    };
    let snapshot = state.snapshot();
    let posterior = tokio::task::spawn_blocking(move || {
        service::infer(&snapshot.kb, &body.observations, &options)
    })
    .await
    .map_err(|e| Error::InvalidArgument(format!("inference task failed: {e}")))??;
    Ok(axum::Json(service::posterior_json(&posterior)).into_response())
}

async fn simulate(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let body: SimulateBody = parse_body(&body)?;
    let forced = service::forced_from_labels(&body.forced)?;
    let snapshot = state.snapshot();
    let (scenario, records) = service::run_simulation(&snapshot.bn, &forced, body.seed)?;
    Ok(axum::Json(service::simulation_json(&scenario, &records)).into_response())
}

async fn reload(State(state): State<Arc<AppState>>) -> ApiResult {
    let text = read_kb(&state.config)?;
    let snapshot = Snapshot::from_text(&text).map_err(|e| ApiError {
        status: StatusCode::UNPROCESSABLE_ENTITY,
        code: e.code().into(),
        message: e.to_string(),
    })?;
    let nodes = snapshot.bn.len();
    state.replace(snapshot);
    Ok(axum::Json(json!({"status": "reloaded", "node_count": nodes})).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = state.config.cors_allowed;
    let router = Router::new()
        .route("/healthz", get(healthz))
        .route("/api/model", get(model))
        .route("/api/bn", get(bn))
        .route("/api/infer", post(infer))
        .route("/api/simulate", post(simulate))
        .route("/api/reload", post(reload))
        .with_state(state);
    if cors {
        router.layer(CorsLayer::permissive())
    } else {
        router
    }
}

/// Loads the knowledge base and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), Error> {
    let state = AppState::load(config.clone())?;
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port))
        .await
        .map_err(|e| Error::Io(format!("cannot bind port {}: {e}", config.port)))?;
    eprintln!("listening on http://0.0.0.0:{}", config.port);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::Io(e.to_string()))
}
