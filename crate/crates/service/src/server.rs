//! HTTP front end. Requests are answered from an immutable [`Engine`];
//! a background task swaps in a new one whenever `CURRENT` changes.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::api::{self, ApiSettings, Params};
use crate::config::ServiceConfig;
use crate::error::CliError;
use crate::store::{current_generation, Engine};

pub struct AppState {
    engine: RwLock<Arc<Engine>>,
    settings: ApiSettings,
    index_dir: PathBuf,
}

impl AppState {
    pub fn new(engine: Engine, settings: ApiSettings, index_dir: PathBuf) -> Self {
        AppState { engine: RwLock::new(Arc::new(engine)), settings, index_dir }
    }

    pub fn engine(&self) -> Arc<Engine> {
        self.engine.read().expect("engine lock").clone()
    }

    /// Loads the published generation if it differs from the served one.
    /// Returns whether a swap happened.
    pub fn reload(&self) -> Result<bool, CliError> {
        let Some(name) = current_generation(&self.index_dir)? else { return Ok(false) };
        if name == self.engine().generation {
            return Ok(false);
        }
        let engine = Engine::load_generation(&self.index_dir, &name)?;
        *self.engine.write().expect("engine lock") = Arc::new(engine);
        log::info!("serving index generation {name}");
        Ok(true)
    }
}

type Shared = Arc<AppState>;
type RawParams = Result<Query<Vec<(String, String)>>, QueryRejection>;

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn respond(result: Result<String, CliError>) -> Response {
    match result {
        Ok(body) => json(StatusCode::OK, body),
        Err(e) => {
            let status = StatusCode::from_u16(e.category.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            if status.is_server_error() {
                log::error!("{e}");
            }
            json(status, e.to_json())
        }
    }
}

fn params(raw: RawParams) -> Result<Params, CliError> {
    let Query(pairs) = raw.map_err(|e| CliError::bad_request(e.body_text()))?;
    Params::new(pairs)
}

async fn autocomplete(State(s): State<Shared>, raw: RawParams) -> Response {
    respond(params(raw).and_then(|p| api::autocomplete(&s.engine(), &s.settings, &p)))
}

async fn search(State(s): State<Shared>, raw: RawParams) -> Response {
    respond(params(raw).and_then(|p| api::search(&s.engine(), &s.settings, &p)))
}

async fn suggest(State(s): State<Shared>, raw: RawParams) -> Response {
    respond(params(raw).and_then(|p| api::suggestions(&s.engine(), &s.settings, &p)))
}

async fn topic(State(s): State<Shared>, Path(uri): Path<String>, raw: RawParams) -> Response {
    respond(params(raw).and_then(|p| api::topic(&s.engine(), &s.settings, &uri, &p)))
}

async fn status(State(s): State<Shared>) -> Response {
    json(StatusCode::OK, api::status(&s.engine()))
}

async fn not_found() -> Response {
    respond(Err(CliError::not_found("no such endpoint")))
}

pub fn router(state: Shared, cors_origins: &[String]) -> Result<Router, CliError> {
    let origin = if cors_origins.is_empty() {
        AllowOrigin::any()
    } else {
        let list = cors_origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| CliError::config(format!("invalid CORS origin `{o}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        AllowOrigin::list(list)
    };
    let cors = CorsLayer::new().allow_methods([Method::GET]).allow_origin(origin);
    Ok(Router::new()
        .route("/api/autocomplete", get(autocomplete))
        .route("/api/search", get(search))
        .route("/api/suggest", get(suggest))
        .route("/api/topic/{*uri}", get(topic))
        .route("/api/status", get(status))
        .fallback(not_found)
        .layer(cors)
        .with_state(state))
}

pub fn api_settings(config: &ServiceConfig) -> ApiSettings {
    ApiSettings { default_lang: config.default_lang().to_string(), limits: config.limits }
}

/// Serves until interrupted. Prints the bound address on standard output.
pub async fn serve(config: &ServiceConfig, bind: Option<String>, port: Option<u16>) -> Result<(), CliError> {
    let index_dir = config.paths.index_dir.clone();
    let engine = tokio::task::block_in_place(|| Engine::load(&index_dir))?;
    let state = Arc::new(AppState::new(engine, api_settings(config), index_dir));
    let app = router(state.clone(), &config.server.cors_origins)?;

    let host = bind.unwrap_or_else(|| config.server.bind.clone());
    let port = port.unwrap_or(config.server.port);
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|_| CliError::config(format!("invalid bind address `{host}:{port}`")))?;
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| CliError::io(format!("{addr}: {e}")))?;
    let local = listener.local_addr().map_err(CliError::io)?;
    println!("listening on http://{local}");

    let interval = Duration::from_millis(config.server.reload_interval_ms.max(100));
    let watcher = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(interval);
        loop {
            tick.tick().await;
            let s = watcher.clone();
            match tokio::task::spawn_blocking(move || s.reload()).await {
                Ok(Err(e)) => log::warn!("index reload failed, keeping the served generation: {e}"),
                Err(e) => log::warn!("index reload task failed: {e}"),
                Ok(Ok(_)) => {}
            }
        }
    });

    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(CliError::io)
}
