use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::camera::CameraIntrinsics;
use super::raster::{check_dims, DepthMap, InstanceId, InstanceMaskFrame};
use crate::error::{Diagnostic, Error, Result};

/// Camera-space points tagged with instance id and source pixel.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledPointCloud {
    points: Vec<Point3<f64>>,
    ids: Vec<InstanceId>,
    src: Vec<(u32, u32)>,
}

impl LabeledPointCloud {
    pub fn new(points: Vec<Point3<f64>>, ids: Vec<InstanceId>, src: Vec<(u32, u32)>) -> Result<Self> {
        if points.len() != ids.len() || points.len() != src.len() {
            return Err(Error::validation(
                "point_cloud",
                format!("length mismatch: {} points, {} ids, {} sources", points.len(), ids.len(), src.len()),
            ));
        }
        if let Some(p) = points.iter().find(|p| p.z.is_nan() || p.z <= 0.0 || !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::validation("point_cloud", format!("point {p:?} must be finite with Z > 0")));
        }
        Ok(Self { points, ids, src })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }
    pub fn ids(&self) -> &[InstanceId] {
        &self.ids
    }
    pub fn src(&self) -> &[(u32, u32)] {
        &self.src
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Translation3D {
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
}

impl Translation3D {
    pub const ZERO: Translation3D = Translation3D { tx: 0.0, ty: 0.0, tz: 0.0 };

    pub fn new(tx: f64, ty: f64, tz: f64) -> Self {
        Self { tx, ty, tz }
    }

    pub fn between(from: &Point3<f64>, to: &Point3<f64>) -> Self {
        let v = to - from;
        Self::new(v.x, v.y, v.z)
    }

    pub fn is_finite(&self) -> bool {
        self.tx.is_finite() && self.ty.is_finite() && self.tz.is_finite()
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.tx, self.ty, self.tz)
    }
}

/// Result of [`unproject_pixels`]: the cloud plus any requested ids that were absent.
#[derive(Clone, Debug)]
pub struct Unprojection {
    pub cloud: LabeledPointCloud,
    pub diagnostics: Vec<Diagnostic>,
}

/// Lift every pixel whose label is in `include_ids` to camera space.
///
/// Points are emitted in row-major pixel order.
pub fn unproject_pixels(
    mask: &InstanceMaskFrame,
    depth: &DepthMap,
    cam: &CameraIntrinsics,
    include_ids: &BTreeSet<InstanceId>,
) -> Result<Unprojection> {
    let dims = (cam.width(), cam.height());
    check_dims("mask", dims, (mask.width(), mask.height()))?;
    check_dims("depth", dims, (depth.width(), depth.height()))?;
    if include_ids.is_empty() {
        return Err(Error::validation("include_ids", "selection is empty"));
    }

    let mut points = Vec::new();
    let mut ids = Vec::new();
    let mut src = Vec::new();
    let mut seen = BTreeSet::new();
    let width = mask.width();
    for (i, &id) in mask.labels().iter().enumerate() {
        if id == 0 || !include_ids.contains(&id) {
            continue;
        }
        let (x, y) = (i as u32 % width, i as u32 / width);
        let z = depth.camera_depth(x, y);
        points.push(cam.unproject(x as f64, y as f64, z));
        ids.push(id);
        src.push((x, y));
        seen.insert(id);
    }

    let diagnostics = include_ids
        .difference(&seen)
        .map(|&instance_id| {
            log::warn!("instance {instance_id} requested but absent from mask");
            Diagnostic::InstanceNotInMask { instance_id }
        })
        .collect();

    Ok(Unprojection { cloud: LabeledPointCloud { points, ids, src }, diagnostics })
}

/// Displace the points of one instance. An absent id is a no-op.
///
/// Points pushed to `Z <= 0` leave the cloud since they can never be seen.
pub fn translate_subset(cloud: &LabeledPointCloud, id: InstanceId, t: Translation3D) -> LabeledPointCloud {
    translate_instances(cloud, &BTreeMap::from([(id, t)]))
}

/// Displace several instances at once, each by its own translation.
///
/// Relative order is preserved; points pushed to `Z <= 0` are dropped.
pub fn translate_instances(cloud: &LabeledPointCloud, moves: &BTreeMap<InstanceId, Translation3D>) -> LabeledPointCloud {
    let mut out = LabeledPointCloud {
        points: Vec::with_capacity(cloud.len()),
        ids: Vec::with_capacity(cloud.len()),
        src: Vec::with_capacity(cloud.len()),
    };
    for ((p, &id), &src) in cloud.points.iter().zip(&cloud.ids).zip(&cloud.src) {
        let q = match moves.get(&id) {
            Some(t) if *t != Translation3D::ZERO => p + t.as_vector(),
            _ => *p,
        };
        if q.z > 0.0 {
            out.points.push(q);
            out.ids.push(id);
            out.src.push(src);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DepthConvention;

    fn cloud(points: &[(f64, f64, f64, InstanceId)]) -> LabeledPointCloud {
        LabeledPointCloud::new(
            points.iter().map(|&(x, y, z, _)| Point3::new(x, y, z)).collect(),
            points.iter().map(|p| p.3).collect(),
            vec![(0, 0); points.len()],
        )
        .unwrap()
    }

    #[test]
    fn zero_translation_is_identity() {
        let c = cloud(&[(1.0, -2.0, 3.0, 1), (0.1, 0.2, 0.3, 2)]);
        assert_eq!(translate_subset(&c, 1, Translation3D::ZERO), c);
    }

    #[test]
    fn translation_applies_to_subset_only() {
        let c = cloud(&[(1.0, 1.0, 1.0, 5)]);
        assert_eq!(translate_subset(&c, 5, Translation3D::new(0.0, 0.0, 2.0)).points()[0], Point3::new(1.0, 1.0, 3.0));

        let c = cloud(&[(1.0, 1.0, 1.0, 1), (2.0, 2.0, 2.0, 2), (3.0, 3.0, 3.0, 1)]);
        let t = translate_subset(&c, 1, Translation3D::new(1.0, 0.0, 0.0));
        assert_eq!(t.points()[1], c.points()[1]);
        assert_eq!(t.points()[0], Point3::new(2.0, 1.0, 1.0));
        assert_eq!(t.ids(), c.ids());
        assert_eq!(translate_subset(&c, 9, Translation3D::new(1.0, 1.0, 1.0)), c);
    }

    #[test]
    fn invariants_checked() {
        assert!(LabeledPointCloud::new(vec![Point3::new(0.0, 0.0, 1.0)], vec![], vec![]).is_err());
        assert!(LabeledPointCloud::new(vec![Point3::new(0.0, 0.0, 0.0)], vec![1], vec![(0, 0)]).is_err());
    }

    #[test]
    fn unproject_selected_pixels() {
        let cam = CameraIntrinsics::new(2.0, 2.0, 0.0, 0.0, 3, 2).unwrap();
        let conv = DepthConvention::LinearRange { z_near: 1.0, z_far: 5.0 };
        // d = 0.5 -> z = 3
        let depth = DepthMap::constant(3, 2, 0.5, conv).unwrap();
        let mut mask = InstanceMaskFrame::empty(3, 2, 0);
        mask.set(2, 0, 4);
        mask.set(1, 1, 7);
        let out = unproject_pixels(&mask, &depth, &cam, &BTreeSet::from([4])).unwrap();
        assert_eq!(out.cloud.points(), &[Point3::new(3.0, 0.0, 3.0)]);
        assert_eq!(out.cloud.ids(), &[4]);
        assert_eq!(out.cloud.src(), &[(2, 0)]);
        assert!(out.diagnostics.is_empty());
    }

    #[test]
    fn absent_id_warns_and_background_is_empty() {
        let cam = CameraIntrinsics::default_for(4, 4).unwrap();
        let depth = DepthMap::constant(4, 4, 0.5, DepthConvention::default()).unwrap();
        let mask = InstanceMaskFrame::empty(4, 4, 0);
        let out = unproject_pixels(&mask, &depth, &cam, &BTreeSet::from([3])).unwrap();
        assert!(out.cloud.is_empty());
        assert_eq!(out.diagnostics, vec![Diagnostic::InstanceNotInMask { instance_id: 3 }]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let cam = CameraIntrinsics::default_for(4, 4).unwrap();
        let depth = DepthMap::constant(4, 3, 0.5, DepthConvention::default()).unwrap();
        let mask = InstanceMaskFrame::empty(4, 4, 0);
        assert!(matches!(
            unproject_pixels(&mask, &depth, &cam, &BTreeSet::from([1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
