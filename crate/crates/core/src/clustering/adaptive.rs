use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Area-driven control-point count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveKPolicy {
    pub alpha: f64,
    pub fluctuation_ratio: f64,
    pub floor_k: usize,
    pub cap_k: usize,
    /// Multiplier on the area-derived count, used at inference.
    pub inference_scale: f64,
}

impl Default for AdaptiveKPolicy {
    fn default() -> Self {
        Self { alpha: 100.0, fluctuation_ratio: 10.0, floor_k: 3, cap_k: 8, inference_scale: 1.0 }
    }
}

impl AdaptiveKPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::validation("alpha", format!("must be > 0, got {}", self.alpha)));
        }
        if !(self.inference_scale > 0.0 && self.inference_scale.is_finite()) {
            return Err(Error::validation("inference_scale", format!("must be > 0, got {}", self.inference_scale)));
        }
        if self.floor_k < 1 || self.cap_k < self.floor_k {
            return Err(Error::validation(
                "policy",
                format!("need cap_k >= floor_k >= 1, got floor {} cap {}", self.floor_k, self.cap_k),
            ));
        }
        Ok(())
    }
}

/// Per-frame pixel counts of one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskStats {
    pub areas: Vec<usize>,
    pub image_area: usize,
}

impl MaskStats {
    pub fn new(areas: Vec<usize>, image_area: usize) -> Self {
        Self { areas, image_area }
    }

    /// `max/min > ratio`; a zero minimum next to a nonzero maximum counts as infinite.
    pub fn fluctuates(&self, ratio: f64) -> bool {
        let max = self.areas.iter().copied().max().unwrap_or(0);
        let min = self.areas.iter().copied().min().unwrap_or(0);
        if max == 0 {
            return false;
        }
        if min == 0 {
            return true;
        }
        max as f64 / min as f64 > ratio
    }
}

/// `round((S / HW)·α·scale)` clamped to at least 1, raised to `floor_k` when the
/// area fluctuates across frames, then capped at `cap_k`.
pub fn adaptive_k(stats: &MaskStats, frame_area: usize, policy: &AdaptiveKPolicy) -> usize {
    let image_area = stats.image_area.max(1) as f64;
    let raw = (frame_area as f64 / image_area) * policy.alpha * policy.inference_scale;
    let k0 = ((raw + 0.5).floor() as usize).max(1);
    let k = if stats.fluctuates(policy.fluctuation_ratio) { k0.max(policy.floor_k) } else { k0 };
    k.min(policy.cap_k)
}
