use std::net::SocketAddr;
use std::sync::Arc;

use anyhow::Context;
use levictl_core::ingest::{ProviderClient, ProviderEndpoint};

use crate::api::{router, AppState};

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub bind: SocketAddr,
    pub capacity: usize,
    pub seed: u64,
    pub depth_provider: Option<ProviderEndpoint>,
    pub seg_provider: Option<ProviderEndpoint>,
}

pub fn app_state(cfg: &ServeConfig) -> AppState {
    let mut state = AppState::new(cfg.capacity, cfg.seed);
    state.depth_provider = cfg.depth_provider.clone().map(|e| Arc::new(ProviderClient::new(e)));
    state.seg_provider = cfg.seg_provider.clone().map(|e| Arc::new(ProviderClient::new(e)));
    state
}

pub async fn serve(cfg: ServeConfig) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(cfg.bind).await.with_context(|| format!("binding {}", cfg.bind))?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app_state(&cfg)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .context("serving")
}
