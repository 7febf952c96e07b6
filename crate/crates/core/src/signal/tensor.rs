use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::heatmap::{footprint, rasterize_heatmap, HeatmapConfig};
use super::points::{ControlPoint, ControlPointSet};
use crate::error::{Error, Result};
use crate::geometry::{DepthConvention, InstanceId};

pub const CHANNELS: usize = 3;
pub const CHANNEL_HEATMAP: usize = 0;
pub const CHANNEL_INSTANCE: usize = 1;
pub const CHANNEL_DEPTH: usize = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingMode {
    #[default]
    MultiPoint,
    /// One point per instance and frame: the weighted centroid of its points.
    SinglePoint,
}

/// Metadata embedded in the container.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorMetadata {
    pub depth_convention: DepthConvention,
    pub alpha: f64,
    pub sigma: f64,
    pub seed: u64,
    pub mode: EncodingMode,
    pub tool_version: String,
}

/// Values that describe how the control points were produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Provenance {
    pub depth_convention: DepthConvention,
    pub alpha: f64,
    pub seed: u64,
}

/// `L×C×H×W` float field, row-major in (frame, channel, row, column).
#[derive(Clone, Debug, PartialEq)]
pub struct ControlTensor {
    shape: [u32; 4],
    data: Vec<f32>,
    metadata: TensorMetadata,
}

impl ControlTensor {
    pub fn new(shape: [u32; 4], data: Vec<f32>, metadata: TensorMetadata) -> Result<Self> {
        let n = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d as usize));
        if n != Some(data.len()) {
            return Err(Error::validation("tensor", format!("shape {shape:?} does not match {} values", data.len())));
        }
        Ok(Self { shape, data, metadata })
    }

    pub fn shape(&self) -> [u32; 4] {
        self.shape
    }
    pub fn data(&self) -> &[f32] {
        &self.data
    }
    pub fn metadata(&self) -> &TensorMetadata {
        &self.metadata
    }

    fn plane_len(&self) -> usize {
        self.shape[2] as usize * self.shape[3] as usize
    }

    /// One `H×W` channel plane of one frame.
    pub fn plane(&self, frame: usize, channel: usize) -> &[f32] {
        let n = self.plane_len();
        let start = (frame * self.shape[1] as usize + channel) * n;
        &self.data[start..start + n]
    }

    pub fn get(&self, frame: usize, channel: usize, y: u32, x: u32) -> f32 {
        self.plane(frame, channel)[y as usize * self.shape[3] as usize + x as usize]
    }
}

/// Collapse each instance's points in a frame to their weighted centroid.
fn centroids(points: &[ControlPoint]) -> Vec<ControlPoint> {
    let mut groups: BTreeMap<InstanceId, Vec<&ControlPoint>> = BTreeMap::new();
    for p in points {
        groups.entry(p.instance_id).or_default().push(p);
    }
    groups
        .into_iter()
        .map(|(id, pts)| {
            let total: f64 = pts.iter().map(|p| p.weight).sum();
            let weighted = total > 0.0;
            let wsum = if weighted { total } else { pts.len() as f64 };
            let mut acc = [0.0; 3];
            for p in &pts {
                let w = if weighted { p.weight } else { 1.0 };
                acc[0] += w * p.x;
                acc[1] += w * p.y;
                acc[2] += w * p.d;
            }
            ControlPoint {
                x: acc[0] / wsum,
                y: acc[1] / wsum,
                d: (acc[2] / wsum).clamp(0.0, 1.0),
                instance_id: id,
                frame: pts[0].frame,
                weight: total,
            }
        })
        .collect()
}

/// Encode one frame into its three channel planes.
fn encode_frame(points: &[ControlPoint], cfg: &HeatmapConfig, height: u32, width: u32, max_id: InstanceId, out: &mut [f32]) {
    let n = height as usize * width as usize;
    let xy: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
    out[..n].copy_from_slice(&rasterize_heatmap(&xy, cfg, height, width));

    // nearest point wins; ties by lower instance id, then lower depth value
    let mut best: Vec<Option<(f64, InstanceId, f64)>> = vec![None; n];
    for p in points {
        for (idx, d2) in footprint(p.x, p.y, cfg.footprint_radius(), height, width) {
            let key = (d2, p.instance_id, p.d);
            let wins = match best[idx] {
                None => true,
                Some(cur) => {
                    key.0.total_cmp(&cur.0).then(key.1.cmp(&cur.1)).then(key.2.total_cmp(&cur.2)).is_lt()
                }
            };
            if wins {
                best[idx] = Some(key);
            }
        }
    }
    let (inst, depth) = out[n..].split_at_mut(n);
    for (idx, b) in best.iter().enumerate() {
        if let Some((_, id, d)) = b {
            inst[idx] = (*id as f64 / max_id as f64) as f32;
            depth[idx] = *d as f32;
        }
    }
}

/// Encode a control-point set as heatmap, normalised-instance and depth channels.
pub fn build_control_tensor(
    cps: &ControlPointSet,
    cfg: &HeatmapConfig,
    mode: EncodingMode,
    provenance: Provenance,
) -> Result<ControlTensor> {
    cfg.validate()?;
    cps.validate()?;
    let (h, w) = (cps.height, cps.width);
    let plane = h as usize * w as usize;
    let max_id = cps.max_instance_id();
    let mut data = vec![0f32; cps.len() * CHANNELS * plane];

    for (frame_points, slab) in cps.frames.iter().zip(data.chunks_exact_mut(CHANNELS * plane)) {
        let reduced;
        let points = match mode {
            EncodingMode::MultiPoint => frame_points.as_slice(),
            EncodingMode::SinglePoint => {
                reduced = centroids(frame_points);
                reduced.as_slice()
            }
        };
        encode_frame(points, cfg, h, w, max_id, slab);
    }

    let metadata = TensorMetadata {
        depth_convention: provenance.depth_convention,
        alpha: provenance.alpha,
        sigma: cfg.sigma,
        seed: provenance.seed,
        mode,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    ControlTensor::new([cps.len() as u32, CHANNELS as u32, h, w], data, metadata)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn provenance() -> Provenance {
        Provenance { depth_convention: DepthConvention::default(), alpha: 100.0, seed: 0 }
    }

    fn cp(x: f64, y: f64, d: f64, id: InstanceId, frame: usize) -> ControlPoint {
        ControlPoint { x, y, d, instance_id: id, frame, weight: 1.0 }
    }

    #[test]
    fn single_point_three_channels() {
        let mut cps = ControlPointSet::new(32, 24, 2, BTreeSet::from([1]));
        cps.frames[0].push(cp(10.0, 8.0, 0.4, 1, 0));
        let t = build_control_tensor(&cps, &HeatmapConfig::default(), EncodingMode::MultiPoint, provenance()).unwrap();
        assert_eq!(t.shape(), [2, 3, 24, 32]);
        assert_eq!(t.get(0, 0, 8, 10), 1.0);
        assert_eq!(t.get(0, 1, 8, 10), 1.0);
        assert_eq!(t.get(0, 2, 8, 10), 0.4f32);
        assert!(t.plane(1, 0).iter().chain(t.plane(1, 1)).chain(t.plane(1, 2)).all(|&v| v == 0.0));
    }

    #[test]
    fn instance_channel_normalised_by_registry_max() {
        let mut cps = ControlPointSet::new(64, 32, 1, BTreeSet::from([1, 2]));
        cps.frames[0].push(cp(8.0, 8.0, 0.2, 1, 0));
        cps.frames[0].push(cp(50.0, 20.0, 0.9, 2, 0));
        let t = build_control_tensor(&cps, &HeatmapConfig::default(), EncodingMode::MultiPoint, provenance()).unwrap();
        assert_eq!(t.get(0, 1, 8, 8), 0.5);
        assert_eq!(t.get(0, 1, 20, 50), 1.0);
        assert_eq!(t.get(0, 1, 9, 9), 0.5);
        assert_eq!(t.get(0, 2, 20, 51), 0.9f32);
    }

    #[test]
    fn overlap_is_order_free() {
        let mut a = ControlPointSet::new(40, 30, 1, BTreeSet::from([1, 2, 3]));
        let pts = [cp(10.0, 10.0, 0.3, 3, 0), cp(14.0, 10.0, 0.6, 1, 0), cp(12.0, 10.0, 0.8, 2, 0)];
        a.frames[0].extend(pts);
        let mut b = a.clone();
        b.frames[0].reverse();
        let cfg = HeatmapConfig::default();
        let ta = build_control_tensor(&a, &cfg, EncodingMode::MultiPoint, provenance()).unwrap();
        let tb = build_control_tensor(&b, &cfg, EncodingMode::MultiPoint, provenance()).unwrap();
        assert_eq!(ta, tb);
        // equidistant from ids 3 and 2 at x=11: lower id wins
        assert_eq!(ta.get(0, 1, 10, 11), (2.0 / 3.0) as f32);
    }

    #[test]
    fn single_point_mode_uses_weighted_centroid() {
        let mut cps = ControlPointSet::new(40, 30, 1, BTreeSet::from([1]));
        cps.frames[0].push(ControlPoint { weight: 3.0, ..cp(10.0, 10.0, 0.2, 1, 0) });
        cps.frames[0].push(ControlPoint { weight: 1.0, ..cp(18.0, 14.0, 0.6, 1, 0) });
        let t = build_control_tensor(&cps, &HeatmapConfig::default(), EncodingMode::SinglePoint, provenance()).unwrap();
        assert_eq!(t.get(0, 0, 11, 12), 1.0);
        assert_eq!(t.get(0, 2, 11, 12), 0.3f32);
        assert_eq!(t.metadata().mode, EncodingMode::SinglePoint);
    }

    #[test]
    fn rejects_inconsistent_sets() {
        let cfg = HeatmapConfig::default();
        let mut cps = ControlPointSet::new(10, 10, 1, BTreeSet::from([1]));
        cps.frames[0].push(cp(12.0, 1.0, 0.5, 1, 0));
        assert!(build_control_tensor(&cps, &cfg, EncodingMode::MultiPoint, provenance()).is_err());
        let mut cps = ControlPointSet::new(10, 10, 1, BTreeSet::from([1]));
        cps.frames[0].push(cp(1.0, 1.0, 0.5, 4, 0));
        assert!(build_control_tensor(&cps, &cfg, EncodingMode::MultiPoint, provenance()).is_err());
        let empty = ControlPointSet::new(10, 10, 0, BTreeSet::from([1]));
        assert!(build_control_tensor(&empty, &cfg, EncodingMode::MultiPoint, provenance()).is_err());
    }
}
