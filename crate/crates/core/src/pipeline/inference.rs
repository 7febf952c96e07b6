use std::collections::{BTreeMap, BTreeSet};

use super::config::SessionConfig;
use super::place::{place_control_points, InstanceRaster};
use super::trajectory::{check_specs, interpolate_trajectory, TrajectorySpec};
use crate::clustering::{adaptive_k, MaskStats};
use crate::error::{Diagnostic, Result};
use crate::geometry::{
    check_dims, render_instances, translate_instances, unproject_pixels, waypoint_to_camera, DepthMap, InstanceId,
    InstanceMaskFrame, RenderedFrame, Translation3D,
};
use crate::signal::{build_control_tensor, ControlPointSet, ControlTensor};

/// Everything a synthesis run produces.
#[derive(Clone, Debug)]
pub struct InferenceOutput {
    pub tensor: ControlTensor,
    /// One rendered frame per output frame.
    pub previews: Vec<RenderedFrame>,
    pub control_points: ControlPointSet,
    /// Control-point count chosen per instance and frame.
    pub k_per_frame: BTreeMap<InstanceId, Vec<usize>>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Per-frame camera-space translation of every moving instance, anchored at
/// its first waypoint: `T_t = Q_t - Q_0`.
pub fn frame_translations(
    specs: &[TrajectorySpec],
    cfg: &SessionConfig,
) -> Result<Vec<BTreeMap<InstanceId, Translation3D>>> {
    let mut frames = vec![BTreeMap::new(); cfg.frames];
    for spec in specs.iter().filter(|s| !s.is_static) {
        let samples = interpolate_trajectory(spec, cfg.frames)?;
        let q0 = waypoint_to_camera(samples[0], &cfg.depth_convention, &cfg.camera)?;
        for (t, s) in samples.iter().enumerate() {
            let q = waypoint_to_camera(*s, &cfg.depth_convention, &cfg.camera)?;
            frames[t].insert(spec.instance_id, Translation3D::between(&q0, &q));
        }
    }
    Ok(frames)
}

/// Turn first-frame depth and masks plus user trajectories into a control tensor.
///
/// The selected instances are lifted to camera space, moved along their
/// trajectories, re-rendered per frame, and clustered on the rendered masks.
/// Control-point depth is read back from the rendered depth buffer. The
/// session config's depth convention governs; the one attached to `depth0` is
/// ignored.
pub fn synthesize_inference_signals(
    depth0: &DepthMap,
    masks0: &InstanceMaskFrame,
    specs: &[TrajectorySpec],
    cfg: &SessionConfig,
) -> Result<InferenceOutput> {
    cfg.validate()?;
    let dims = (cfg.width, cfg.height);
    check_dims("masks", dims, (masks0.width(), masks0.height()))?;
    check_dims("depth", dims, (depth0.width(), depth0.height()))?;
    if let Some(e) = check_specs(specs, masks0, cfg.frames).into_iter().next() {
        return Err(e.into());
    }

    let depth = depth0.clone().with_convention(cfg.depth_convention)?;
    let selected: BTreeSet<InstanceId> = specs.iter().map(|s| s.instance_id).collect();
    let lifted = unproject_pixels(masks0, &depth, &cfg.camera, &selected)?;
    let mut diagnostics = lifted.diagnostics;

    let previews: Vec<RenderedFrame> = frame_translations(specs, cfg)?
        .iter()
        .map(|moves| render_instances(&translate_instances(&lifted.cloud, moves), &cfg.camera, cfg.splat_radius))
        .collect();

    let image_area = cfg.image_area();
    let mut k_per_frame = BTreeMap::new();
    let mut cps = ControlPointSet::new(cfg.width, cfg.height, cfg.frames, masks0.registry().into_keys().collect());

    for &id in &selected {
        let areas: Vec<usize> = previews.iter().map(|r| r.area(id)).collect();
        if areas.iter().all(|&a| a == 0) {
            log::warn!("instance {id} is not visible in any rendered frame");
            diagnostics.push(Diagnostic::InstanceVanished { instance_id: id });
            k_per_frame.insert(id, vec![0; cfg.frames]);
            continue;
        }
        let stats = MaskStats::new(areas.clone(), image_area);
        let mut ks = Vec::with_capacity(cfg.frames);
        for (t, frame) in previews.iter().enumerate() {
            let k = if areas[t] == 0 { 0 } else { adaptive_k(&stats, areas[t], &cfg.policy) };
            ks.push(k.min(areas[t]));
            if k == 0 {
                continue;
            }
            let conv = cfg.depth_convention;
            let raster = InstanceRaster {
                labels: frame.instance_image(),
                width: cfg.width,
                height: cfg.height,
                id,
                depth: |x, y| conv.to_relative(frame.depth(x, y)),
            };
            let pixels = frame.pixels_of(id);
            cps.frames[t].extend(place_control_points(&raster, &pixels, k, &cfg.kmeans, t)?);
        }
        k_per_frame.insert(id, ks);
    }

    let tensor = build_control_tensor(&cps, &cfg.heatmap, cfg.mode, cfg.provenance())?;
    Ok(InferenceOutput { tensor, previews, control_points: cps, k_per_frame, diagnostics })
}
