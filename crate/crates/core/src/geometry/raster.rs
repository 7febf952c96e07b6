use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type InstanceId = u32;

/// Mapping from relative depth `d ∈ [0, 1]` (larger = nearer) to camera depth `z > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DepthConvention {
    /// `z = z_near + (1 - d)·(z_far - z_near)`.
    LinearRange { z_near: f64, z_far: f64 },
    /// `z = 1 / max(d, eps)`.
    DisparityInverse { eps: f64 },
}

impl Default for DepthConvention {
    fn default() -> Self {
        DepthConvention::LinearRange { z_near: 1.0, z_far: 10.0 }
    }
}

impl DepthConvention {
    pub fn disparity_inverse() -> Self {
        DepthConvention::DisparityInverse { eps: 0.05 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DepthConvention::LinearRange { z_near, z_far } => {
                if !(z_near.is_finite() && z_far.is_finite() && z_near > 0.0 && z_far > z_near) {
                    return Err(Error::validation(
                        "depth_convention",
                        format!("need 0 < z_near < z_far, got z_near={z_near}, z_far={z_far}"),
                    ));
                }
            }
            DepthConvention::DisparityInverse { eps } => {
                if !(eps > 0.0 && eps <= 1.0) {
                    return Err(Error::validation("depth_convention", format!("eps must be in (0, 1], got {eps}")));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn to_camera_depth(&self, d: f64) -> f64 {
        match *self {
            DepthConvention::LinearRange { z_near, z_far } => z_near + (1.0 - d) * (z_far - z_near),
            DepthConvention::DisparityInverse { eps } => 1.0 / d.max(eps),
        }
    }

    /// Inverse of [`Self::to_camera_depth`], clamped to `[0, 1]`.
    #[inline]
    pub fn to_relative(&self, z: f64) -> f64 {
        let d = match *self {
            DepthConvention::LinearRange { z_near, z_far } => 1.0 - (z - z_near) / (z_far - z_near),
            DepthConvention::DisparityInverse { .. } => 1.0 / z,
        };
        d.clamp(0.0, 1.0)
    }

    pub fn name(&self) -> &'static str {
        match self {
            DepthConvention::LinearRange { .. } => "linear-range",
            DepthConvention::DisparityInverse { .. } => "disparity-inverse",
        }
    }
}

/// Per-pixel relative depth for one frame, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    values: Vec<f32>,
    convention: DepthConvention,
}

impl DepthMap {
    /// Values must be finite and inside `[0, 1]`.
    pub fn new(width: u32, height: u32, values: Vec<f32>, convention: DepthConvention) -> Result<Self> {
        check_len("depth", width, height, values.len())?;
        convention.validate()?;
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(Error::validation(
                "depth",
                format!("value {v} at ({}, {}) outside [0, 1]", i as u32 % width, i as u32 / width),
            ));
        }
        Ok(Self { width, height, values, convention })
    }

    pub fn constant(width: u32, height: u32, value: f32, convention: DepthConvention) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize], convention)
    }

    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn values(&self) -> &[f32] {
        &self.values
    }
    pub fn convention(&self) -> &DepthConvention {
        &self.convention
    }

    pub fn with_convention(mut self, convention: DepthConvention) -> Result<Self> {
        convention.validate()?;
        self.convention = convention;
        Ok(self)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.values[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn camera_depth(&self, x: u32, y: u32) -> f64 {
        self.convention.to_camera_depth(self.get(x, y) as f64)
    }
}

/// Axis-aligned pixel bounding box, inclusive on both ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub area: usize,
    pub bbox: BoundingBox,
}

/// Per-pixel instance labels for one frame; 0 is background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceMaskFrame {
    width: u32,
    height: u32,
    labels: Vec<InstanceId>,
    frame_index: usize,
}

impl InstanceMaskFrame {
    pub fn new(width: u32, height: u32, labels: Vec<InstanceId>, frame_index: usize) -> Result<Self> {
        check_len("mask", width, height, labels.len())?;
        Ok(Self { width, height, labels, frame_index })
    }

    pub fn empty(width: u32, height: u32, frame_index: usize) -> Self {
        Self { width, height, labels: vec![0; width as usize * height as usize], frame_index }
    }

    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn labels(&self) -> &[InstanceId] {
        &self.labels
    }
    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn with_frame_index(mut self, frame_index: usize) -> Self {
        self.frame_index = frame_index;
        self
    }

    #[inline]
    pub fn label(&self, x: u32, y: u32) -> InstanceId {
        self.labels[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, id: InstanceId) {
        self.labels[(y * self.width + x) as usize] = id;
    }

    pub fn area(&self, id: InstanceId) -> usize {
        self.labels.iter().filter(|&&l| l == id).count()
    }

    /// Pixel coordinates labeled `id`, in row-major order.
    pub fn pixels_of(&self, id: InstanceId) -> Vec<[f64; 2]> {
        pixels_labeled(&self.labels, self.width, id)
    }

    /// Every nonzero instance with its area and bounding box.
    pub fn registry(&self) -> BTreeMap<InstanceId, InstanceInfo> {
        let mut out: BTreeMap<InstanceId, InstanceInfo> = BTreeMap::new();
        for (i, &id) in self.labels.iter().enumerate() {
            if id == 0 {
                continue;
            }
            let (x, y) = (i as u32 % self.width, i as u32 / self.width);
            out.entry(id)
                .and_modify(|info| {
                    info.area += 1;
                    info.bbox.x0 = info.bbox.x0.min(x);
                    info.bbox.x1 = info.bbox.x1.max(x);
                    info.bbox.y0 = info.bbox.y0.min(y);
                    info.bbox.y1 = info.bbox.y1.max(y);
                })
                .or_insert(InstanceInfo { area: 1, bbox: BoundingBox { x0: x, y0: y, x1: x, y1: y } });
        }
        out
    }

    pub fn dims_match(&self, width: u32, height: u32) -> bool {
        self.width == width && self.height == height
    }
}

pub(crate) fn pixels_labeled(labels: &[InstanceId], width: u32, id: InstanceId) -> Vec<[f64; 2]> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == id)
        .map(|(i, _)| [(i as u32 % width) as f64, (i as u32 / width) as f64])
        .collect()
}

pub(crate) fn check_dims(what: &str, expected: (u32, u32), actual: (u32, u32)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            what: what.to_string(),
            expected_w: expected.0,
            expected_h: expected.1,
            actual_w: actual.0,
            actual_h: actual.1,
        });
    }
    Ok(())
}

fn check_len(what: &str, width: u32, height: u32, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::validation(what, "raster size must be positive"));
    }
    if len != width as usize * height as usize {
        return Err(Error::validation(what, format!("{len} values for a {width}x{height} raster")));
    }
    Ok(())
}
