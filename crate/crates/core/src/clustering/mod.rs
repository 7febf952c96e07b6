//! Seeded K-means over mask pixels and the area-driven cluster-count policy.

mod adaptive;
mod kmeans;
mod lattice;
pub mod rng;

pub use adaptive::{adaptive_k, AdaptiveKPolicy, MaskStats};
pub use kmeans::{kmeans_points, sse, KMeansConfig};
