use serde::{Deserialize, Serialize};

use crate::clustering::{AdaptiveKPolicy, KMeansConfig};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DepthConvention};
use crate::signal::{EncodingMode, HeatmapConfig, Provenance};

pub const DEFAULT_FRAMES: usize = 16;
pub const DEFAULT_HEIGHT: u32 = 288;
pub const DEFAULT_WIDTH: u32 = 512;

/// Everything a synthesis or extraction run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub frames: usize,
    pub height: u32,
    pub width: u32,
    pub camera: CameraIntrinsics,
    pub depth_convention: DepthConvention,
    pub kmeans: KMeansConfig,
    pub policy: AdaptiveKPolicy,
    pub heatmap: HeatmapConfig,
    pub splat_radius: u32,
    pub mode: EncodingMode,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self::for_resolution(DEFAULT_HEIGHT, DEFAULT_WIDTH).expect("default resolution is valid")
    }
}

impl SessionConfig {
    /// Defaults scaled to the given resolution: sigma and splat radius grow with
    /// `min(H, W)/288`, intrinsics follow [`CameraIntrinsics::default_for`].
    pub fn for_resolution(height: u32, width: u32) -> Result<Self> {
        let scale = height.min(width) as f64 / DEFAULT_HEIGHT as f64;
        Ok(Self {
            frames: DEFAULT_FRAMES,
            height,
            width,
            camera: CameraIntrinsics::default_for(width, height)?,
            depth_convention: DepthConvention::default(),
            kmeans: KMeansConfig::default(),
            policy: AdaptiveKPolicy::default(),
            heatmap: HeatmapConfig::for_resolution(height, width),
            splat_radius: (2.0 * scale + 0.5).floor() as u32,
            mode: EncodingMode::MultiPoint,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames < 2 {
            return Err(Error::validation("frames", format!("need at least 2 frames, got {}", self.frames)));
        }
        if self.height == 0 || self.width == 0 {
            return Err(Error::validation("resolution", "must be positive"));
        }
        if (self.camera.width(), self.camera.height()) != (self.width, self.height) {
            return Err(Error::validation(
                "camera",
                format!(
                    "intrinsics are for {}x{}, session is {}x{}",
                    self.camera.width(),
                    self.camera.height(),
                    self.width,
                    self.height
                ),
            ));
        }
        self.depth_convention.validate()?;
        self.kmeans.validate()?;
        self.policy.validate()?;
        self.heatmap.validate()?;
        Ok(())
    }

    pub fn image_area(&self) -> usize {
        self.height as usize * self.width as usize
    }

    pub fn provenance(&self) -> Provenance {
        Provenance { depth_convention: self.depth_convention, alpha: self.policy.alpha, seed: self.kmeans.seed }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SessionConfig::default();
        assert_eq!((c.frames, c.height, c.width, c.splat_radius), (16, 288, 512, 2));
        assert_eq!(c.heatmap.sigma, 3.0);
        c.validate().unwrap();
        let big = SessionConfig::for_resolution(576, 1024).unwrap();
        assert_eq!((big.splat_radius, big.heatmap.sigma), (4, 6.0));
    }

    #[test]
    fn rejects_single_frame() {
        let c = SessionConfig { frames: 1, ..SessionConfig::default() };
        assert!(c.validate().is_err());
    }
}
