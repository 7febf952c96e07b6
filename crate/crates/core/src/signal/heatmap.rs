use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference resolution (short side) at which `sigma = 3`.
const REFERENCE_SHORT_SIDE: f64 = 288.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapConfig {
    /// Gaussian standard deviation in pixels. The footprint is truncated at `3·sigma`.
    pub sigma: f64,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self { sigma: 3.0 }
    }
}

impl HeatmapConfig {
    /// `sigma = 3·min(H, W)/288`.
    pub fn for_resolution(height: u32, width: u32) -> Self {
        Self { sigma: 3.0 * height.min(width) as f64 / REFERENCE_SHORT_SIDE }
    }

    pub fn footprint_radius(&self) -> f64 {
        3.0 * self.sigma
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::validation("sigma", format!("must be > 0, got {}", self.sigma)));
        }
        Ok(())
    }
}

/// Pixels within the truncated footprint of `(x, y)` together with their squared distance.
pub(crate) fn footprint(
    x: f64,
    y: f64,
    radius: f64,
    height: u32,
    width: u32,
) -> impl Iterator<Item = (usize, f64)> {
    let r2 = radius * radius;
    let x_lo = (x - radius).ceil().max(0.0);
    let x_hi = (x + radius).floor().min(width as f64 - 1.0);
    let y_lo = (y - radius).ceil().max(0.0);
    let y_hi = (y + radius).floor().min(height as f64 - 1.0);
    let (xs, ys) = if x_lo > x_hi || y_lo > y_hi {
        (0..0, 0..0)
    } else {
        (x_lo as u32..x_hi as u32 + 1, y_lo as u32..y_hi as u32 + 1)
    };
    ys.flat_map(move |py| xs.clone().map(move |px| (px, py))).filter_map(move |(px, py)| {
        let dx = px as f64 - x;
        let dy = py as f64 - y;
        let d2 = dx * dx + dy * dy;
        (d2 <= r2).then_some((py as usize * width as usize + px as usize, d2))
    })
}

/// Max-combined truncated Gaussians, one per point, as an `H×W` row-major field.
pub fn rasterize_heatmap(points: &[[f64; 2]], cfg: &HeatmapConfig, height: u32, width: u32) -> Vec<f32> {
    let mut field = vec![0f32; height as usize * width as usize];
    let two_sigma2 = 2.0 * cfg.sigma * cfg.sigma;
    for p in points {
        for (idx, d2) in footprint(p[0], p[1], cfg.footprint_radius(), height, width) {
            let g = libm::exp(-d2 / two_sigma2) as f32;
            if g > field[idx] {
                field[idx] = g;
            }
        }
    }
    field
}
