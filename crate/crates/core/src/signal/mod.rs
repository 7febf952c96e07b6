//! Dense conditioning field built from per-frame control points.
//!
//! Channel 0 is a max-combined Gaussian heatmap. Channels 1 and 2 carry the
//! normalised instance id and the relative depth of the nearest control point
//! inside its `3σ` footprint.

mod container;
mod depth;
mod heatmap;
mod points;
mod tensor;

pub use container::{deserialize, serialize, write_tensor, MAGIC, VERSION};
pub use depth::sample_depth;
pub use heatmap::{rasterize_heatmap, HeatmapConfig};
pub use points::{ControlPoint, ControlPointSet};
pub use tensor::{
    build_control_tensor, ControlTensor, EncodingMode, Provenance, TensorMetadata, CHANNELS, CHANNEL_DEPTH,
    CHANNEL_HEATMAP, CHANNEL_INSTANCE,
};
