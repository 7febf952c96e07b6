use crate::error::{Error, Result};
use crate::geometry::DepthMap;

/// Bilinear depth lookup; exact at integer coordinates.
pub fn sample_depth(depth: &DepthMap, x: f64, y: f64) -> Result<f64> {
    let (w, h) = (depth.width(), depth.height());
    if !(x >= 0.0 && y >= 0.0 && x <= (w - 1) as f64 && y <= (h - 1) as f64) {
        return Err(Error::validation("sample_depth", format!("({x}, {y}) outside {w}x{h}")));
    }
    let x0 = x.floor() as u32;
    let y0 = y.floor() as u32;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let v = |x, y| depth.get(x, y) as f64;
    let top = v(x0, y0) * (1.0 - fx) + v(x1, y0) * fx;
    let bottom = v(x0, y1) * (1.0 - fx) + v(x1, y1) * fx;
    Ok(top * (1.0 - fy) + bottom * fy)
}
