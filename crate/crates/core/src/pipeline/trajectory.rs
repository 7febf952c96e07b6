use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{InstanceId, InstanceMaskFrame, PixelDepth};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub d: f64,
    #[serde(default)]
    pub frame: Option<usize>,
}

impl Waypoint {
    pub fn new(x: f64, y: f64, d: f64) -> Self {
        Self { x, y, d, frame: None }
    }

    pub fn at(x: f64, y: f64, d: f64, frame: usize) -> Self {
        Self { x, y, d, frame: Some(frame) }
    }

    fn sample(&self) -> PixelDepth {
        PixelDepth { x: self.x, y: self.y, d: self.d }
    }
}

/// A user trajectory for one instance. Static specs keep their object in place.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    #[serde(rename = "id")]
    pub instance_id: InstanceId,
    #[serde(rename = "static", default)]
    pub is_static: bool,
    #[serde(default)]
    pub waypoints: Vec<Waypoint>,
}

impl TrajectorySpec {
    pub fn moving(instance_id: InstanceId, waypoints: Vec<Waypoint>) -> Self {
        Self { instance_id, is_static: false, waypoints }
    }

    pub fn anchor(instance_id: InstanceId) -> Self {
        Self { instance_id, is_static: true, waypoints: Vec::new() }
    }
}

/// The trajectory file exchanged with the CLI and HTTP service.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDocument {
    pub version: u32,
    #[serde(rename = "L")]
    pub frames: usize,
    /// `[H, W]`.
    pub resolution: [u32; 2],
    pub objects: Vec<TrajectorySpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl From<FieldError> for Error {
    fn from(e: FieldError) -> Self {
        Error::Validation { field: e.field, message: e.message }
    }
}

impl TrajectoryDocument {
    pub const VERSION: u32 = 1;

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::parse("trajectory", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory document serializes")
    }

    /// Every problem with the document against the first-frame masks.
    pub fn check(&self, masks0: &InstanceMaskFrame) -> Vec<FieldError> {
        let mut errs = Vec::new();
        if self.version != Self::VERSION {
            errs.push(FieldError::new("version", format!("unsupported version {}", self.version)));
        }
        if self.frames < 2 {
            errs.push(FieldError::new("L", format!("need at least 2 frames, got {}", self.frames)));
        }
        let [h, w] = self.resolution;
        if (w, h) != (masks0.width(), masks0.height()) {
            errs.push(FieldError::new(
                "resolution",
                format!("[{h}, {w}] does not match session [{}, {}]", masks0.height(), masks0.width()),
            ));
            return errs;
        }
        errs.extend(check_specs(&self.objects, masks0, self.frames.max(2)));
        errs
    }
}

/// Per-object checks shared by the document validator and the pipeline.
pub(crate) fn check_specs(specs: &[TrajectorySpec], masks0: &InstanceMaskFrame, frames: usize) -> Vec<FieldError> {
    let mut errs = Vec::new();
    if specs.is_empty() {
        errs.push(FieldError::new("objects", "no objects selected"));
    }
    let registry = masks0.registry();
    let mut seen = BTreeSet::new();
    for (i, spec) in specs.iter().enumerate() {
        let base = format!("objects[{i}]");
        let id = spec.instance_id;
        if !seen.insert(id) {
            errs.push(FieldError::new(format!("{base}.id"), format!("instance {id} listed twice")));
        }
        if !registry.contains_key(&id) {
            errs.push(FieldError::new(format!("{base}.id"), format!("instance {id} is not in the first-frame masks")));
            continue;
        }
        for (j, wp) in spec.waypoints.iter().enumerate() {
            let f = format!("{base}.waypoints[{j}]");
            if !(0.0..=1.0).contains(&wp.d) {
                errs.push(FieldError::new(format!("{f}.d"), format!("{} is outside [0, 1]", wp.d)));
            }
            let (w, h) = (masks0.width() as f64, masks0.height() as f64);
            if !(wp.x >= 0.0 && wp.y >= 0.0 && wp.x <= w - 1.0 && wp.y <= h - 1.0) {
                errs.push(FieldError::new(f.clone(), format!("({}, {}) outside the image", wp.x, wp.y)));
            }
            if let Some(fr) = wp.frame {
                if fr >= frames {
                    errs.push(FieldError::new(format!("{f}.frame"), format!("{fr} outside [0, {frames})")));
                }
            }
        }
        if spec.is_static {
            continue;
        }
        let Some(first) = spec.waypoints.first() else {
            errs.push(FieldError::new(format!("{base}.waypoints"), "a moving object needs at least one waypoint"));
            continue;
        };
        if let Err(e) = assign_frames(&spec.waypoints, frames) {
            errs.push(FieldError::new(format!("{base}.waypoints"), e.to_string()));
        }
        if masks0.width() > 0 && first.x >= 0.0 && first.y >= 0.0 {
            let (px, py) = ((first.x + 0.5).floor() as u32, (first.y + 0.5).floor() as u32);
            if px < masks0.width() && py < masks0.height() && masks0.label(px, py) != id {
                errs.push(FieldError::new(
                    format!("{base}.waypoints[0]"),
                    format!("first waypoint ({}, {}) is outside instance {id}", first.x, first.y),
                ));
            }
        }
    }
    errs
}

/// Frame index of each waypoint: explicit frames are kept, the first and last
/// default to `0` and `L-1`, and the rest are spread by cumulative 2D arc length.
fn assign_frames(waypoints: &[Waypoint], frames: usize) -> Result<Vec<usize>> {
    let n = waypoints.len();
    let mut anchors: Vec<Option<usize>> = waypoints.iter().map(|w| w.frame).collect();
    if let Some((i, f)) = anchors.iter().enumerate().find_map(|(i, f)| f.filter(|&f| f >= frames).map(|f| (i, f))) {
        return Err(Error::validation(format!("waypoints[{i}].frame"), format!("{f} outside [0, {frames})")));
    }
    if anchors[0].is_none() {
        anchors[0] = Some(0);
    }
    if anchors[n - 1].is_none() {
        anchors[n - 1] = Some(frames - 1);
    }

    let fixed: Vec<(usize, usize)> = anchors.iter().enumerate().filter_map(|(i, f)| f.map(|f| (i, f))).collect();
    if n > 1 {
        for pair in fixed.windows(2) {
            if pair[1].1 <= pair[0].1 {
                return Err(Error::validation(
                    format!("waypoints[{}].frame", pair[1].0),
                    format!("frames must be strictly increasing ({} after {})", pair[1].1, pair[0].1),
                ));
            }
        }
    }

    let mut out: Vec<usize> = anchors.iter().map(|f| f.unwrap_or(0)).collect();
    for pair in fixed.windows(2) {
        let ((i, fi), (j, fj)) = (pair[0], pair[1]);
        if j - i < 2 {
            continue;
        }
        let seg: Vec<f64> = (i..j)
            .map(|m| {
                let (a, b) = (&waypoints[m], &waypoints[m + 1]);
                ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt()
            })
            .collect();
        let total: f64 = seg.iter().sum();
        let mut acc = 0.0;
        for m in i + 1..j {
            acc += seg[m - 1 - i];
            let frac = if total > 0.0 { acc / total } else { (m - i) as f64 / (j - i) as f64 };
            out[m] = fi + ((fj - fi) as f64 * frac + 0.5).floor() as usize;
        }
    }
    Ok(out)
}

/// Per-frame `(x, y, d)` samples of length `frames`, linear between waypoints.
pub fn interpolate_trajectory(spec: &TrajectorySpec, frames: usize) -> Result<Vec<PixelDepth>> {
    if frames == 0 {
        return Err(Error::validation("L", "must be positive"));
    }
    let wps = &spec.waypoints;
    let Some(first) = wps.first() else {
        return Err(Error::validation(
            format!("instance {}", spec.instance_id),
            "trajectory has no waypoints",
        ));
    };
    if wps.len() == 1 {
        return Ok(vec![first.sample(); frames]);
    }
    let assigned = assign_frames(wps, frames)?;
    let last = wps.len() - 1;

    Ok((0..frames)
        .map(|t| {
            if t <= assigned[0] {
                return wps[0].sample();
            }
            if t >= assigned[last] {
                return wps[last].sample();
            }
            let m = (0..last).find(|&m| assigned[m] <= t && t < assigned[m + 1]).expect("t is inside the span");
            let (a, b) = (&wps[m], &wps[m + 1]);
            let s = (t - assigned[m]) as f64 / (assigned[m + 1] - assigned[m]) as f64;
            PixelDepth { x: a.x + (b.x - a.x) * s, y: a.y + (b.y - a.y) * s, d: a.d + (b.d - a.d) * s }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_midpoint() {
        let spec = TrajectorySpec::moving(1, vec![Waypoint::at(0.0, 0.0, 0.5, 0), Waypoint::at(10.0, 0.0, 0.5, 10)]);
        let s = interpolate_trajectory(&spec, 16).unwrap();
        assert_eq!(s[5], PixelDepth { x: 5.0, y: 0.0, d: 0.5 });
        assert_eq!(s[15], PixelDepth { x: 10.0, y: 0.0, d: 0.5 });
    }

    #[test]
    fn single_waypoint_is_constant() {
        let spec = TrajectorySpec::moving(1, vec![Waypoint::new(3.0, 4.0, 0.2)]);
        let s = interpolate_trajectory(&spec, 16).unwrap();
        assert!(s.iter().all(|p| *p == PixelDepth { x: 3.0, y: 4.0, d: 0.2 }));
        assert_eq!(s.len(), 16);
    }

    #[test]
    fn arc_length_allocation() {
        let spec = TrajectorySpec::moving(
            1,
            vec![Waypoint::new(0.0, 0.0, 0.5), Waypoint::new(10.0, 0.0, 0.5), Waypoint::new(10.0, 30.0, 0.5)],
        );
        assert_eq!(assign_frames(&spec.waypoints, 16).unwrap(), vec![0, 4, 15]);
        let s = interpolate_trajectory(&spec, 16).unwrap();
        assert_eq!((s[4].x, s[4].y), (10.0, 0.0));
        assert_eq!((s[2].x, s[2].y), (5.0, 0.0));
    }

    #[test]
    fn depth_interpolates_linearly() {
        let spec = TrajectorySpec::moving(1, vec![Waypoint::new(0.0, 0.0, 0.2), Waypoint::new(0.0, 0.0, 0.8)]);
        let s = interpolate_trajectory(&spec, 4).unwrap();
        let ds: Vec<f64> = s.iter().map(|p| p.d).collect();
        assert!((ds[1] - 0.4).abs() < 1e-12 && (ds[2] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn non_monotonic_frames_rejected() {
        let spec = TrajectorySpec::moving(1, vec![Waypoint::at(0.0, 0.0, 0.5, 6), Waypoint::at(1.0, 0.0, 0.5, 3)]);
        assert!(interpolate_trajectory(&spec, 16).is_err());
        let spec = TrajectorySpec::moving(1, vec![Waypoint::new(0.0, 0.0, 0.5), Waypoint::at(1.0, 0.0, 0.5, 0)]);
        assert!(interpolate_trajectory(&spec, 16).is_err());
        let spec = TrajectorySpec::moving(1, vec![Waypoint::new(0.0, 0.0, 0.5), Waypoint::at(1.0, 0.0, 0.5, 16)]);
        assert!(interpolate_trajectory(&spec, 16).is_err());
    }

    #[test]
    fn holds_before_first_and_after_last_explicit_frame() {
        let spec = TrajectorySpec::moving(1, vec![Waypoint::at(2.0, 0.0, 0.5, 3), Waypoint::at(6.0, 0.0, 0.5, 5)]);
        let s = interpolate_trajectory(&spec, 8).unwrap();
        let xs: Vec<f64> = s.iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![2.0, 2.0, 2.0, 2.0, 4.0, 6.0, 6.0, 6.0]);
    }

    #[test]
    fn document_json_schema() {
        let json = r#"{"version":1,"L":16,"resolution":[4,6],"objects":[
            {"id":1,"static":false,"waypoints":[{"x":1.0,"y":1.0,"d":0.5,"frame":null},{"x":4.0,"y":2.0,"d":0.7,"frame":15}]},
            {"id":2,"static":true,"waypoints":[]}]}"#;
        let doc = TrajectoryDocument::from_json(json.as_bytes()).unwrap();
        assert_eq!(doc.frames, 16);
        assert_eq!(doc.objects[1], TrajectorySpec::anchor(2));
        let back = TrajectoryDocument::from_json(doc.to_json().as_bytes()).unwrap();
        assert_eq!(back, doc);
        let v: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        assert!(v["objects"][0]["waypoints"][0]["frame"].is_null());

        let mut mask = InstanceMaskFrame::empty(6, 4, 0);
        mask.set(1, 1, 1);
        mask.set(5, 3, 2);
        assert!(doc.check(&mask).is_empty());
        let mut bad = doc.clone();
        bad.objects[0].waypoints[1].d = 2.0;
        bad.objects[1].instance_id = 9;
        let errs = bad.check(&mask);
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        assert_eq!(fields, vec!["objects[0].waypoints[1].d", "objects[1].id"]);
    }
}
