//! HTTP front end for the sketch optimizer.
//!
//! Endpoints: `POST /classify`, `POST /optimize`, `GET /health`. Anything
//! else is served from an optional static directory (the browser UI).

pub mod api;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use axum::routing::{get, post};
use axum::Router;
use sketchcoach_core::classifier::{load_model, ClassifierModel, ModelIoError};
use thiserror::Error;
use tower_http::services::ServeDir;

/// Default per-request bound on optimization iterations.
pub const DEFAULT_ITERATION_CAP: usize = 500;

/// Shared, read-only server state. The model slot is filled once.
#[derive(Clone)]
pub struct AppState {
    model: Arc<OnceLock<Arc<ClassifierModel>>>,
    iteration_cap: usize,
}

impl AppState {
    pub fn loading(iteration_cap: usize) -> Self {
        Self {
            model: Arc::new(OnceLock::new()),
            iteration_cap,
        }
    }

    pub fn ready(model: ClassifierModel, iteration_cap: usize) -> Self {
        let state = Self::loading(iteration_cap);
        state.set_model(model);
        state
    }

    /// Installs the model; later calls are ignored.
    pub fn set_model(&self, model: ClassifierModel) {
        let _ = self.model.set(Arc::new(model));
    }

    pub fn model(&self) -> Option<Arc<ClassifierModel>> {
        self.model.get().cloned()
    }

    pub fn iteration_cap(&self) -> usize {
        self.iteration_cap
    }
}

pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/classify", post(api::classify))
        .route("/optimize", post(api::optimize))
        .route("/health", get(api::health))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub model_path: PathBuf,
    pub addr: SocketAddr,
    pub static_dir: Option<PathBuf>,
    pub iteration_cap: usize,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("model file {path}: {source}")]
    ModelUnavailable { path: PathBuf, source: std::io::Error },
    #[error("failed to load model: {0}")]
    ModelLoad(#[from] ModelIoError),
    #[error("static directory {0} does not exist")]
    StaticDir(PathBuf),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("server error: {0}")]
    Serve(std::io::Error),
}

/// Serves until interrupted. The model file must exist before the socket is
/// opened; it is then parsed in the background while `/health` reports
/// `loading`. A model that fails to parse terminates the process.
pub async fn serve(cfg: ServerConfig) -> Result<(), ServiceError> {
    std::fs::File::open(&cfg.model_path).map_err(|source| ServiceError::ModelUnavailable {
        path: cfg.model_path.clone(),
        source,
    })?;
    if let Some(dir) = &cfg.static_dir {
        if !dir.is_dir() {
            return Err(ServiceError::StaticDir(dir.clone()));
        }
    }
    let state = AppState::loading(cfg.iteration_cap);
    let listener = tokio::net::TcpListener::bind(cfg.addr)
        .await
        .map_err(|source| ServiceError::Bind { addr: cfg.addr, source })?;
    log::info!("listening on {}", cfg.addr);

    let loader = state.clone();
    let path = cfg.model_path.clone();
    tokio::task::spawn_blocking(move || match load_model(&path) {
        Ok(m) => {
            log::info!("model loaded: {} classes", m.num_classes());
            loader.set_model(m);
        }
        Err(e) => {
            log::error!("failed to load model {}: {e}", path.display());
            eprintln!("error: failed to load model {}: {e}", path.display());
            std::process::exit(1);
        }
    });

    let app = router(state, cfg.static_dir.as_deref());
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServiceError::Serve)
}
