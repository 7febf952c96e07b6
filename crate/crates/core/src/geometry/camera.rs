use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::raster::DepthConvention;
use crate::error::{Error, Result};

/// Pinhole intrinsics with identity rotation. Pixel centers sit on integer
/// coordinates; a continuous coordinate `x` is in bounds when `0 <= x <= width - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntrinsics")]
pub struct CameraIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
}

#[derive(Deserialize)]
struct RawIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
}

impl TryFrom<RawIntrinsics> for CameraIntrinsics {
    type Error = Error;

    fn try_from(r: RawIntrinsics) -> Result<Self> {
        CameraIntrinsics::new(r.fx, r.fy, r.cx, r.cy, r.width, r.height)
    }
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation("camera", "image size must be positive"));
        }
        if !(fx.is_finite() && fx > 0.0 && fy.is_finite() && fy > 0.0) {
            return Err(Error::validation("camera", format!("focal lengths must be > 0 (fx={fx}, fy={fy})")));
        }
        if !(0.0..width as f64).contains(&cx) || !(0.0..height as f64).contains(&cy) {
            return Err(Error::validation(
                "camera",
                format!("principal point ({cx}, {cy}) outside {width}x{height}"),
            ));
        }
        Ok(Self { fx, fy, cx, cy, width, height })
    }

    /// `fx = fy = max(width, height)` with the principal point at the image center.
    pub fn default_for(width: u32, height: u32) -> Result<Self> {
        let f = width.max(height) as f64;
        Self::new(f, f, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }
    pub fn fy(&self) -> f64 {
        self.fy
    }
    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x <= (self.width - 1) as f64 && y <= (self.height - 1) as f64
    }

    /// `K⁻¹·[x, y, 1]ᵀ·z`.
    #[inline]
    pub fn unproject(&self, x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new((x - self.cx) / self.fx * z, (y - self.cy) / self.fy * z, z)
    }

    /// Continuous pixel coordinates of a camera-space point.
    #[inline]
    pub fn project(&self, p: &Point3<f64>) -> Result<(f64, f64)> {
        if p.z.is_nan() || p.z <= 0.0 {
            return Err(Error::BehindCamera { z: p.z });
        }
        Ok((self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }
}

/// A user waypoint: pixel position plus relative depth in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PixelDepth {
    pub x: f64,
    pub y: f64,
    pub d: f64,
}

pub fn waypoint_to_camera(
    wp: PixelDepth,
    convention: &DepthConvention,
    cam: &CameraIntrinsics,
) -> Result<Point3<f64>> {
    if !(0.0..=1.0).contains(&wp.d) {
        return Err(Error::validation("waypoint.d", format!("{} is outside [0, 1]", wp.d)));
    }
    if !cam.contains(wp.x, wp.y) {
        return Err(Error::validation(
            "waypoint",
            format!("({}, {}) outside {}x{}", wp.x, wp.y, cam.width(), cam.height()),
        ));
    }
    Ok(cam.unproject(wp.x, wp.y, convention.to_camera_depth(wp.d)))
}
