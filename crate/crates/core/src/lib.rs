//! Control-signal engine for depth-aware trajectory conditioning.
//!
//! Object masks become camera-space point clouds, move along user trajectories,
//! are rendered back with occlusion, and are abstracted into a handful of
//! K-means control points per object and frame. The points are finally
//! encoded as an `L×3×H×W` tensor (heatmap, instance, depth).

pub mod clustering;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod signal;

pub use error::{Diagnostic, Error, Result};
