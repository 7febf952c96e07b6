//! Trajectory fidelity between predefined and tracked point trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-point positions over `L` frames, optionally with visibility flags.
///
/// The on-disk form is `{"L": int, "points": [[[x, y], ...L], ...N],
/// "visible": [[bool, ...L], ...N] | null}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedTrajectorySet {
    #[serde(rename = "L")]
    pub frames: usize,
    pub points: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub visible: Option<Vec<Vec<bool>>>,
}

impl TrackedTrajectorySet {
    pub fn new(points: Vec<Vec<[f64; 2]>>, visible: Option<Vec<Vec<bool>>>) -> Result<Self> {
        let frames = points.first().map_or(0, Vec::len);
        let set = Self { frames, points, visible };
        set.validate()?;
        Ok(set)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let set: Self = serde_json::from_slice(bytes).map_err(|e| Error::parse("tracks", e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("track set serializes")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn is_visible(&self, i: usize, t: usize) -> bool {
        self.visible.as_ref().is_none_or(|v| v[i][t])
    }

    pub fn validate(&self) -> Result<()> {
        for (i, track) in self.points.iter().enumerate() {
            if track.len() != self.frames {
                return Err(Error::validation(
                    format!("points[{i}]"),
                    format!("has {} frames, expected L = {}", track.len(), self.frames),
                ));
            }
            if track.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!("points[{i}]"), "non-finite coordinate"));
            }
        }
        if let Some(vis) = &self.visible {
            if vis.len() != self.points.len() {
                return Err(Error::validation(
                    "visible",
                    format!("{} rows for {} points", vis.len(), self.points.len()),
                ));
            }
            if let Some(i) = vis.iter().position(|row| row.len() != self.frames) {
                return Err(Error::validation(format!("visible[{i}]"), format!("expected {} flags", self.frames)));
            }
        }
        Ok(())
    }
}

/// Mean Euclidean distance between corresponding positions, pooled over all
/// points and frames (frame 0 included).
///
/// With `include_invisible == false`, pairs hidden in either set are left out.
/// Returns 0 when no pair qualifies.
pub fn objmc(reference: &TrackedTrajectorySet, generated: &TrackedTrajectorySet, include_invisible: bool) -> Result<f64> {
    reference.validate()?;
    generated.validate()?;
    if reference.len() != generated.len() || reference.frames != generated.frames {
        return Err(Error::validation(
            "tracks",
            format!(
                "sets are not aligned: {} points x {} frames vs {} points x {} frames",
                reference.len(),
                reference.frames,
                generated.len(),
                generated.frames
            ),
        ));
    }
    let mut total = 0.0;
    let mut n = 0usize;
    for (i, (a, b)) in reference.points.iter().zip(&generated.points).enumerate() {
        for (t, (p, q)) in a.iter().zip(b).enumerate() {
            if !include_invisible && !(reference.is_visible(i, t) && generated.is_visible(i, t)) {
                continue;
            }
            total += (p[0] - q[0]).hypot(p[1] - q[1]);
            n += 1;
        }
    }
    Ok(if n == 0 { 0.0 } else { total / n as f64 })
}
