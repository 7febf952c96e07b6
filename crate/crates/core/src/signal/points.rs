use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::InstanceId;

/// One control point: position, relative depth, owning instance and frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub x: f64,
    pub y: f64,
    pub d: f64,
    pub instance_id: InstanceId,
    pub frame: usize,
    /// Pixel count of the cluster this point summarises; used for the
    /// single-point centroid. Defaults to 1.
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

/// Control points of all instances, one list per frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPointSet {
    pub width: u32,
    pub height: u32,
    pub frames: Vec<Vec<ControlPoint>>,
    /// Registered instance ids; channel-1 values are normalised by the largest.
    pub instance_ids: BTreeSet<InstanceId>,
}

impl ControlPointSet {
    pub fn new(width: u32, height: u32, frames: usize, instance_ids: BTreeSet<InstanceId>) -> Self {
        Self { width, height, frames: vec![Vec::new(); frames], instance_ids }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn max_instance_id(&self) -> InstanceId {
        self.instance_ids.iter().next_back().copied().unwrap_or(0)
    }

    pub fn total_points(&self) -> usize {
        self.frames.iter().map(Vec::len).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::validation("control_points", "no frames"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::validation("control_points", "resolution must be positive"));
        }
        if self.instance_ids.contains(&0) {
            return Err(Error::validation("control_points", "instance id 0 is reserved for background"));
        }
        let (w, h) = (self.width as f64, self.height as f64);
        for (t, frame) in self.frames.iter().enumerate() {
            for p in frame {
                let field = format!("frames[{t}]");
                if p.frame != t {
                    return Err(Error::validation(field, format!("point tagged frame {} in list {t}", p.frame)));
                }
                if !(p.x >= 0.0 && p.y >= 0.0 && p.x <= w - 1.0 && p.y <= h - 1.0) {
                    return Err(Error::validation(
                        field,
                        format!("point ({}, {}) outside {}x{}", p.x, p.y, self.width, self.height),
                    ));
                }
                if !(0.0..=1.0).contains(&p.d) {
                    return Err(Error::validation(field, format!("depth {} outside [0, 1]", p.d)));
                }
                if !self.instance_ids.contains(&p.instance_id) {
                    return Err(Error::validation(field, format!("instance {} not registered", p.instance_id)));
                }
                if !(p.weight >= 0.0 && p.weight.is_finite()) {
                    return Err(Error::validation(field, format!("weight {} must be finite and >= 0", p.weight)));
                }
            }
        }
        Ok(())
    }
}
