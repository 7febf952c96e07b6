//! Pinhole camera math and the instance-aware point renderer.
//!
//! The camera never rotates. Pixels are lifted to camera space with
//! `K⁻¹·[x, y, 1]ᵀ·z`, moved rigidly per instance, and splatted back with a
//! z-buffer that records which instance is visible at each pixel.

mod camera;
mod cloud;
pub(crate) mod raster;
mod render;

pub use camera::{waypoint_to_camera, CameraIntrinsics, PixelDepth};
pub use cloud::{translate_instances, translate_subset, unproject_pixels, LabeledPointCloud, Translation3D, Unprojection};
pub use raster::{BoundingBox, DepthConvention, DepthMap, InstanceId, InstanceInfo, InstanceMaskFrame};
pub(crate) use raster::check_dims;
pub use render::{disk_offsets, render_instances, RenderedFrame};
