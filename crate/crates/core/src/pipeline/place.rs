use crate::clustering::{kmeans_points, KMeansConfig};
use crate::error::Result;
use crate::geometry::InstanceId;
use crate::signal::ControlPoint;

/// One instance's support in a label raster plus a per-pixel relative depth.
pub(crate) struct InstanceRaster<'a, D: Fn(u32, u32) -> f64> {
    pub labels: &'a [InstanceId],
    pub width: u32,
    pub height: u32,
    pub id: InstanceId,
    pub depth: D,
}

impl<D: Fn(u32, u32) -> f64> InstanceRaster<'_, D> {
    fn inside(&self, x: u32, y: u32) -> bool {
        self.labels[y as usize * self.width as usize + x as usize] == self.id
    }

    /// Bilinear depth over the four surrounding texels, using only texels that
    /// belong to the instance so background depth never bleeds into a point.
    fn depth_at(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = (x.floor() as u32, y.floor() as u32);
        let (x1, y1) = ((x0 + 1).min(self.width - 1), (y0 + 1).min(self.height - 1));
        let (fx, fy) = (x - x0 as f64, y - y0 as f64);
        let taps = [
            (x0, y0, (1.0 - fx) * (1.0 - fy)),
            (x1, y0, fx * (1.0 - fy)),
            (x0, y1, (1.0 - fx) * fy),
            (x1, y1, fx * fy),
        ];
        let (mut acc, mut wsum) = (0.0, 0.0);
        for (tx, ty, w) in taps {
            if w > 0.0 && self.inside(tx, ty) {
                acc += w * (self.depth)(tx, ty);
                wsum += w;
            }
        }
        if wsum > 0.0 {
            acc / wsum
        } else {
            let (rx, ry) = (round_half_up(x), round_half_up(y));
            (self.depth)(rx, ry)
        }
    }
}

fn round_half_up(v: f64) -> u32 {
    (v + 0.5).floor() as u32
}

/// Cluster an instance's pixels into `k` control points for one frame.
///
/// `pixels` must be the instance's pixels in row-major order. Centers whose
/// nearest pixel falls outside the instance (possible for non-convex masks)
/// are moved to the closest instance pixel. Each point's weight is the size of
/// its cluster.
pub(crate) fn place_control_points<D: Fn(u32, u32) -> f64>(
    raster: &InstanceRaster<'_, D>,
    pixels: &[[f64; 2]],
    k: usize,
    cfg: &KMeansConfig,
    frame: usize,
) -> Result<Vec<ControlPoint>> {
    let k = k.min(pixels.len());
    if k == 0 {
        return Ok(Vec::new());
    }
    let centers = kmeans_points(pixels, k, cfg)?;

    let mut counts = vec![0usize; k];
    for p in pixels {
        let mut best = (f64::INFINITY, 0);
        for (j, c) in centers.iter().enumerate() {
            let d = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
            if d < best.0 {
                best = (d, j);
            }
        }
        counts[best.1] += 1;
    }

    Ok(centers
        .iter()
        .zip(counts)
        .map(|(c, n)| {
            let [x, y] = snap(raster, pixels, *c);
            ControlPoint {
                x,
                y,
                d: raster.depth_at(x, y).clamp(0.0, 1.0),
                instance_id: raster.id,
                frame,
                weight: n as f64,
            }
        })
        .collect())
}

fn snap<D: Fn(u32, u32) -> f64>(raster: &InstanceRaster<'_, D>, pixels: &[[f64; 2]], c: [f64; 2]) -> [f64; 2] {
    let (rx, ry) = (round_half_up(c[0]), round_half_up(c[1]));
    if rx < raster.width && ry < raster.height && raster.inside(rx, ry) {
        return c;
    }
    let mut best = (f64::INFINITY, pixels[0]);
    for p in pixels {
        let d = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
        if d < best.0 {
            best = (d, *p);
        }
    }
    best.1
}
