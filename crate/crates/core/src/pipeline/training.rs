use std::collections::{BTreeMap, BTreeSet};

use super::config::SessionConfig;
use super::place::{place_control_points, InstanceRaster};
use crate::clustering::{adaptive_k, AdaptiveKPolicy, MaskStats};
use crate::error::{Diagnostic, Error, Result};
use crate::geometry::{check_dims, DepthMap, InstanceId, InstanceMaskFrame};
use crate::signal::{build_control_tensor, ControlPointSet, ControlTensor};

#[derive(Clone, Debug)]
pub struct TrainingOutput {
    pub tensor: ControlTensor,
    pub control_points: ControlPointSet,
    pub k_per_frame: BTreeMap<InstanceId, Vec<usize>>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Control signals from annotated masks and per-frame depth, for every
/// instance that appears in any frame.
pub fn extract_training_signals(
    masks: &[InstanceMaskFrame],
    depths: &[DepthMap],
    cfg: &SessionConfig,
) -> Result<TrainingOutput> {
    let ids = masks.iter().flat_map(|m| m.labels().iter().copied()).filter(|&id| id != 0).collect();
    extract_training_signals_for(masks, depths, &ids, cfg)
}

/// Like [`extract_training_signals`] for an explicit instance registry. Listed
/// instances that are empty in every frame are skipped with a diagnostic.
pub fn extract_training_signals_for(
    masks: &[InstanceMaskFrame],
    depths: &[DepthMap],
    ids: &BTreeSet<InstanceId>,
    cfg: &SessionConfig,
) -> Result<TrainingOutput> {
    cfg.validate()?;
    if masks.len() != cfg.frames || depths.len() != cfg.frames {
        return Err(Error::validation(
            "frames",
            format!("expected {} masks and depth maps, got {} and {}", cfg.frames, masks.len(), depths.len()),
        ));
    }
    if ids.contains(&0) {
        return Err(Error::validation("instance_ids", "0 is reserved for background"));
    }
    let dims = (cfg.width, cfg.height);
    for (t, (m, d)) in masks.iter().zip(depths).enumerate() {
        check_dims(&format!("masks[{t}]"), dims, (m.width(), m.height()))?;
        check_dims(&format!("depths[{t}]"), dims, (d.width(), d.height()))?;
    }

    let policy = AdaptiveKPolicy { inference_scale: 1.0, ..cfg.policy };
    let image_area = cfg.image_area();
    let mut diagnostics = Vec::new();
    let mut k_per_frame = BTreeMap::new();
    let mut cps = ControlPointSet::new(cfg.width, cfg.height, cfg.frames, ids.clone());

    for &id in ids {
        let areas: Vec<usize> = masks.iter().map(|m| m.area(id)).collect();
        if areas.iter().all(|&a| a == 0) {
            log::warn!("instance {id} is empty in every frame; skipped");
            diagnostics.push(Diagnostic::InstanceEmpty { instance_id: id });
            k_per_frame.insert(id, vec![0; cfg.frames]);
            continue;
        }
        let stats = MaskStats::new(areas.clone(), image_area);
        let mut ks = Vec::with_capacity(cfg.frames);
        for (t, (mask, depth)) in masks.iter().zip(depths).enumerate() {
            let k = if areas[t] == 0 { 0 } else { adaptive_k(&stats, areas[t], &policy) };
            ks.push(k.min(areas[t]));
            if k == 0 {
                continue;
            }
            let raster = InstanceRaster {
                labels: mask.labels(),
                width: cfg.width,
                height: cfg.height,
                id,
                depth: |x, y| depth.get(x, y) as f64,
            };
            let pixels = mask.pixels_of(id);
            cps.frames[t].extend(place_control_points(&raster, &pixels, k, &cfg.kmeans, t)?);
        }
        k_per_frame.insert(id, ks);
    }

    let tensor = build_control_tensor(&cps, &cfg.heatmap, cfg.mode, cfg.provenance())?;
    Ok(TrainingOutput { tensor, control_points: cps, k_per_frame, diagnostics })
}
