//! Read-only HTTP JSON API over a loaded and closed bundle.
//!
//! The bundle is loaded and closed once at startup; requests share the
//! result without mutating it.

mod error;
mod routes;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::http::HeaderValue;
use axum::Router;
use pibase_core::corpus::{read_documents, SourceDocument};
use pibase_core::{validate_documents, Database, ValidationReport};
use thiserror::Error;
use tower_http::cors::{Any, CorsLayer};

pub use error::ApiError;
pub use routes::{CheckResponse, Page};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiConfig {
    pub bind: SocketAddr,
    pub bundle: PathBuf,
    /// Must be true; the service has no write endpoints.
    pub read_only: bool,
    /// Allowed CORS origin; `*` allows any.
    pub cors_origin: String,
}

impl ApiConfig {
    pub fn new(bundle: impl Into<PathBuf>) -> Self {
        ApiConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            bundle: bundle.into(),
            read_only: true,
            cors_origin: "*".into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StartError {
    #[error("bundle failed validation")]
    Invalid(ValidationReport),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Serve(std::io::Error),
}

/// The immutable snapshot every request reads.
#[derive(Debug)]
pub struct AppState {
    pub db: Database,
    sources: Vec<SourceDocument>,
}

impl AppState {
    /// Refuses bundles with load errors or contradictions.
    pub fn from_documents(docs: Vec<SourceDocument>) -> Result<Self, ValidationReport> {
        match validate_documents(docs.clone()) {
            (report, Some(db)) if report.is_clean() => Ok(AppState { db, sources: docs }),
            (report, _) => Err(report),
        }
    }

    pub fn load(root: &Path) -> Result<Self, ValidationReport> {
        Self::from_documents(read_documents(root)?)
    }
}

fn cors(origin: &str) -> Result<CorsLayer, StartError> {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    if origin == "*" {
        return Ok(layer.allow_origin(Any));
    }
    let value = HeaderValue::from_str(origin)
        .map_err(|_| StartError::Config(format!("bad CORS origin `{origin}`")))?;
    Ok(layer.allow_origin(value))
}

pub fn router(state: Arc<AppState>, cors_origin: &str) -> Result<Router, StartError> {
    Ok(routes::routes().with_state(state).layer(cors(cors_origin)?))
}

/// Loads the bundle, then serves until the process ends.
pub async fn serve(config: ApiConfig) -> Result<(), StartError> {
    if !config.read_only {
        return Err(StartError::Config(
            "only read-only mode is supported".into(),
        ));
    }
    let state = AppState::load(&config.bundle).map_err(StartError::Invalid)?;
    let app = router(Arc::new(state), &config.cors_origin)?;
    let listener = tokio::net::TcpListener::bind(config.bind)
        .await
        .map_err(|source| StartError::Bind {
            addr: config.bind,
            source,
        })?;
    eprintln!(
        "listening on http://{}",
        listener.local_addr().map_err(StartError::Serve)?
    );
    axum::serve(listener, app).await.map_err(StartError::Serve)
}

/// Runs [`serve`] on a fresh multi-threaded runtime.
pub fn run_blocking(config: ApiConfig) -> Result<(), StartError> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(StartError::Serve)?
        .block_on(serve(config))
}
