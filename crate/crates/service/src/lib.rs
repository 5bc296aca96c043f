//! HTTP JSON API over the current index snapshot.
//!
//! Routes: `GET /search`, `GET /entry/{key}`, `GET /tags/tree`, `GET /stats`
//! and `POST /admin/reload`. Responses never set cookies. Each request is
//! logged through [`logging::RequestLog`], which stores only salted client
//! hashes and encrypts every line.

use std::net::SocketAddr;
use std::sync::Arc;

pub mod api;
pub mod config;
pub mod logging;
pub mod state;

pub use api::router;
pub use config::ServiceConfig;
pub use state::{AppState, ReloadError, ReloadOutcome, StartError};

/// Serves until Ctrl-C.
pub async fn serve(state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(state.config.listen).await?;
    let app = router(state).into_make_service_with_connect_info::<SocketAddr>();
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
