//! HTTP session service and batch CLI around `levictl-core`.

pub mod api;
pub mod cli;
pub mod outline;
pub mod server;
pub mod store;

pub use api::{router, AppState};
pub use server::{serve, ServeConfig};
pub use store::SessionStore;
