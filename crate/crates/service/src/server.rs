//! HTTP endpoints, bearer-token gate and request logging.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Instant;

use agentmesh_core::canonical::to_canonical_string;
use agentmesh_core::message::{message_from_wire, MessageError};
use agentmesh_core::{ErrorCode, Runtime, RuntimeError, TaskError};
use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::routing::{get, post};
use axum::Router;
use parking_lot::Mutex;
use serde_json::{json, Value};
use tokio::sync::oneshot;

use crate::config::{ConfigError, ServiceConfig};
use crate::openapi::openapi_document;

pub const TRACE_HEADER: &str = "x-trace-id";

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("runtime: {0}")]
    Runtime(#[from] RuntimeError),
    #[error("cannot bind {address}: {source}")]
    Bind {
        address: String,
        source: std::io::Error,
    },
    #[error("cannot open log {path}: {source}")]
    Log {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

pub struct AppState {
    pub runtime: Arc<Runtime>,
    tokens: HashSet<String>,
    auth_disabled: bool,
    log: Option<Mutex<File>>,
}

impl AppState {
    pub fn new(config: &ServiceConfig) -> Result<Self, ServeError> {
        config.validate()?;
        let runtime = Runtime::load(&config.runtime_config())?;
        let log = match &config.log_path {
            Some(path) => Some(Mutex::new(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|source| ServeError::Log {
                        path: path.clone(),
                        source,
                    })?,
            )),
            None => None,
        };
        Ok(AppState {
            runtime: Arc::new(runtime),
            tokens: config
                .auth_tokens
                .iter()
                .filter(|t| !t.is_empty())
                .cloned()
                .collect(),
            auth_disabled: config.auth_disabled,
            log,
        })
    }

    fn authorized(&self, header: Option<&HeaderValue>) -> bool {
        if self.auth_disabled {
            return true;
        }
        header
            .and_then(|h| h.to_str().ok())
            .and_then(|h| h.strip_prefix("Bearer "))
            .is_some_and(|token| self.tokens.contains(token.trim()))
    }
}

fn json_response(status: StatusCode, body: String) -> Response {
    Response::builder()
        .status(status)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body))
        .expect("static response parts are valid")
}

/// `{code, message, details}` with the status mapped from the code.
pub fn error_response(error: &TaskError) -> Response {
    let status = StatusCode::from_u16(error.code.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    let body = json!({
        "code": error.code,
        "message": error.message,
        "details": error.details.clone().unwrap_or(Value::Null),
    });
    let mut resp = json_response(status, to_canonical_string(&body));
    if error.code == ErrorCode::AuthFailed {
        resp.headers_mut()
            .insert(header::WWW_AUTHENTICATE, HeaderValue::from_static("Bearer"));
    }
    resp
}

fn ok_json(value: &Value) -> Response {
    json_response(StatusCode::OK, to_canonical_string(value))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, Response> {
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        error_response(&TaskError::new(ErrorCode::Internal, format!("worker failed: {e}")))
    })
}

async fn post_message(State(app): State<Arc<AppState>>, body: Bytes) -> Response {
    let text = match std::str::from_utf8(&body) {
        Ok(t) => t.to_string(),
        Err(e) => return error_response(&TaskError::new(ErrorCode::ParseError, e.to_string())),
    };
    let request = match message_from_wire(&text) {
        Ok(m) => m,
        Err(MessageError::Parse(m)) => return error_response(&TaskError::new(ErrorCode::ParseError, m)),
        Err(e) => return error_response(&TaskError::new(ErrorCode::SchemaError, e.to_string())),
    };
    let runtime = Arc::clone(&app.runtime);
    match blocking(move || runtime.directory.dispatch(&request)).await {
        Ok(Ok(reply)) => json_response(StatusCode::OK, reply.to_wire()),
        Ok(Err(e)) => error_response(&e),
        Err(resp) => resp,
    }
}

async fn get_card(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match app.runtime.registry.get_card(&id) {
        Some(card) => json_response(StatusCode::OK, card.to_canonical_json()),
        None => error_response(&TaskError::new(ErrorCode::UnknownAgent, format!("no agent {id:?}"))),
    }
}

async fn list_agents(
    State(app): State<Arc<AppState>>,
    Query(q): Query<HashMap<String, String>>,
) -> Response {
    let cards = match q.get("capability") {
        Some(cap) => app.runtime.registry.discover(cap),
        None => app.runtime.registry.list(),
    };
    ok_json(&Value::Array(cards.iter().map(|c| c.to_value()).collect()))
}

async fn list_tools(State(app): State<Arc<AppState>>) -> Response {
    let tools: Vec<Value> = app.runtime.toolbox.descriptions().iter().map(|d| d.to_value()).collect();
    ok_json(&Value::Array(tools))
}

async fn get_tool(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match app.runtime.toolbox.description(&id) {
        Some(d) => json_response(StatusCode::OK, d.to_canonical_json()),
        None => error_response(&TaskError::new(ErrorCode::ToolNotFound, format!("no tool {id:?}"))),
    }
}

async fn call_tool(
    State(app): State<Arc<AppState>>,
    Path((tool_id, function)): Path<(String, String)>,
    Query(q): Query<HashMap<String, String>>,
    body: Bytes,
) -> Response {
    let params: Value = if body.iter().all(u8::is_ascii_whitespace) {
        json!({})
    } else {
        match serde_json::from_slice(&body) {
            Ok(v) => v,
            Err(e) => return error_response(&TaskError::new(ErrorCode::ParseError, e.to_string())),
        }
    };
    let session = q.get("session").cloned();
    let runtime = Arc::clone(&app.runtime);
    let outcome = blocking(move || {
        runtime
            .toolbox
            .call_function(&tool_id, &function, &params, session.as_deref())
    })
    .await;
    match outcome {
        Ok(Ok(r)) => ok_json(&json!({ "function": r.function, "result": r.value, "duration_ms": r.duration_ms })),
        Ok(Err(e)) => error_response(&e),
        Err(resp) => resp,
    }
}

async fn get_task(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match app.runtime.tasks.get(&id) {
        Some(task) => ok_json(&serde_json::to_value(task).expect("tasks serialize")),
        None => error_response(&TaskError::new(ErrorCode::UnknownTask, format!("no task {id:?}"))),
    }
}

async fn list_tasks(State(app): State<Arc<AppState>>) -> Response {
    ok_json(&serde_json::to_value(app.runtime.tasks.list()).expect("tasks serialize"))
}

async fn healthz(State(app): State<Arc<AppState>>) -> Response {
    ok_json(&json!({
        "status": "ok",
        "agents": app.runtime.directory.ids().len(),
        "tools": app.runtime.toolbox.descriptions().len(),
    }))
}

async fn openapi() -> Response {
    ok_json(&openapi_document())
}

async fn not_found(req: Request) -> Response {
    error_response(&TaskError::new(
        ErrorCode::NotFound,
        format!("no route for {} {}", req.method(), req.uri().path()),
    ))
}

async fn require_token(State(app): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    if app.authorized(req.headers().get(header::AUTHORIZATION)) {
        next.run(req).await
    } else {
        error_response(&TaskError::new(
            ErrorCode::AuthFailed,
            "missing or invalid bearer token",
        ))
    }
}

async fn log_request(State(app): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    let started = Instant::now();
    let method = req.method().to_string();
    let path = req.uri().path().to_string();
    let trace_id = req
        .headers()
        .get(TRACE_HEADER)
        .and_then(|v| v.to_str().ok())
        .filter(|v| !v.is_empty() && v.len() <= 128)
        .map(String::from)
        .unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
    let mut resp = next.run(req).await;
    let duration_ms = started.elapsed().as_secs_f64() * 1000.0;
    let status = resp.status().as_u16();
    let line = json!({
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        "method": method,
        "path": path,
        "status": status,
        "duration_ms": duration_ms,
        "trace_id": trace_id,
    });
    tracing::info!(target: "agentmesh::request", %method, %path, status, duration_ms, %trace_id);
    if let Some(log) = &app.log {
        let mut file = log.lock();
        let _ = writeln!(file, "{}", to_canonical_string(&line));
    }
    if let Ok(v) = HeaderValue::from_str(&trace_id) {
        resp.headers_mut().insert(TRACE_HEADER, v);
    }
    resp
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/a2a/messages", post(post_message))
        .route("/agents/{id}/card", get(get_card))
        .route("/registry/agents", get(list_agents))
        .route("/mcp/tools", get(list_tools))
        .route("/mcp/tools/{tool_id}", get(get_tool))
        .route("/mcp/tools/{tool_id}/call/{function}", post(call_tool))
        .route("/tasks", get(list_tasks))
        .route("/tasks/{id}", get(get_task))
        .route("/healthz", get(healthz))
        .route("/openapi.json", get(openapi))
        .fallback(not_found)
        .layer(middleware::from_fn_with_state(Arc::clone(&app), require_token))
        .layer(middleware::from_fn_with_state(Arc::clone(&app), log_request))
        .with_state(app)
}

fn bind(address: &str) -> Result<std::net::TcpListener, ServeError> {
    let listener = std::net::TcpListener::bind(address).map_err(|source| ServeError::Bind {
        address: address.to_string(),
        source,
    })?;
    listener.set_nonblocking(true)?;
    Ok(listener)
}

fn tokio_runtime() -> Result<tokio::runtime::Runtime, ServeError> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}

/// Runs the service until SIGINT or SIGTERM. `on_ready` receives the bound address.
pub fn serve(config: &ServiceConfig, on_ready: impl FnOnce(SocketAddr)) -> Result<(), ServeError> {
    let app = Arc::new(AppState::new(config)?);
    let listener = bind(&config.bind_address)?;
    let addr = listener.local_addr()?;
    let rt = tokio_runtime()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::from_std(listener)?;
        on_ready(addr);
        axum::serve(listener, router(app))
            .with_graceful_shutdown(shutdown_signal())
            .await
    })?;
    Ok(())
}

/// A service running on a background thread.
pub struct ServerHandle {
    addr: SocketAddr,
    app: Arc<AppState>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<std::io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// State shared with the running server, e.g. to inspect its task store.
    pub fn state(&self) -> &Arc<AppState> {
        &self.app
    }

    /// Stops accepting connections, lets in-flight requests finish and joins the thread.
    pub fn shutdown(mut self) -> std::io::Result<()> {
        self.stop()
    }

    fn stop(&mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().unwrap_or_else(|_| Err(std::io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.stop();
    }
}

/// Starts the service on a background thread and returns once it is listening.
pub fn spawn(config: &ServiceConfig) -> Result<ServerHandle, ServeError> {
    let app = Arc::new(AppState::new(config)?);
    let listener = bind(&config.bind_address)?;
    let addr = listener.local_addr()?;
    let rt = tokio_runtime()?;
    let (tx, rx) = oneshot::channel::<()>();
    let router = router(Arc::clone(&app));
    let thread = std::thread::Builder::new()
        .name(format!("agentmesh-{addr}"))
        .spawn(move || {
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener)?;
                axum::serve(listener, router)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
            })
        })?;
    Ok(ServerHandle {
        addr,
        app,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}
