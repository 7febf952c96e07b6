//! Synthetic demo data at the default 288×512 resolution.
//!
//! The scene has a background that acts as an anchor, a ball, a box and a
//! small unselected sign. The VOS sequence animates the same kind of scene
//! over several frames, with one object briefly hidden.

use crate::geometry::{DepthConvention, DepthMap, InstanceId, InstanceMaskFrame};
use crate::ingest::RgbImage;
use crate::pipeline::{TrajectoryDocument, TrajectorySpec, Waypoint, DEFAULT_HEIGHT, DEFAULT_WIDTH};

pub const BACKGROUND: InstanceId = 1;
pub const BALL: InstanceId = 2;
pub const BOX: InstanceId = 3;
pub const SIGN: InstanceId = 4;

/// Single-frame inputs for inference.
#[derive(Clone, Debug)]
pub struct DemoScene {
    pub image: RgbImage,
    pub depth: DepthMap,
    pub masks: InstanceMaskFrame,
    pub trajectories: TrajectoryDocument,
}

fn color(id: InstanceId) -> [u8; 3] {
    match id {
        BACKGROUND => [90, 140, 190],
        BALL => [220, 60, 40],
        BOX => [240, 200, 60],
        _ => [40, 160, 80],
    }
}

fn background_depth(y: u32, h: u32) -> f32 {
    0.1 + 0.3 * y as f32 / (h - 1) as f32
}

struct Shape {
    id: InstanceId,
    d: f32,
    inside: Box<dyn Fn(f64, f64) -> bool>,
}

fn disk(cx: f64, cy: f64, r: f64) -> Box<dyn Fn(f64, f64) -> bool> {
    Box::new(move |x, y| (x - cx).powi(2) + (y - cy).powi(2) <= r * r)
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Box<dyn Fn(f64, f64) -> bool> {
    Box::new(move |x, y| x >= x0 && x < x1 && y >= y0 && y < y1)
}

/// Paint shapes in order over a background; later shapes cover earlier ones.
fn paint(shapes: &[Shape], frame: usize) -> (RgbImage, DepthMap, InstanceMaskFrame) {
    let (w, h) = (DEFAULT_WIDTH, DEFAULT_HEIGHT);
    let mut image = RgbImage::filled(w, h, color(BACKGROUND));
    let mut masks = InstanceMaskFrame::empty(w, h, frame);
    let mut depth = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x as f64, y as f64);
            let mut label = (BACKGROUND, background_depth(y, h));
            for s in shapes {
                if (s.inside)(px, py) {
                    label = (s.id, s.d);
                }
            }
            masks.set(x, y, label.0);
            depth.push(label.1);
            let shade = (y * 40 / h) as u8;
            let [r, g, b] = color(label.0);
            image.put(x, y, [r.saturating_sub(shade), g.saturating_sub(shade), b.saturating_sub(shade)]);
        }
    }
    let depth = DepthMap::new(w, h, depth, DepthConvention::default()).expect("fixture depth is in range");
    (image, depth, masks)
}

/// The demo image with two moving objects and an anchored background.
pub fn demo_scene() -> DemoScene {
    let shapes = [
        Shape { id: BALL, d: 0.7, inside: disk(140.0, 180.0, 40.0) },
        Shape { id: BOX, d: 0.55, inside: rect(320.0, 90.0, 420.0, 200.0) },
        Shape { id: SIGN, d: 0.3, inside: rect(440.0, 30.0, 470.0, 60.0) },
    ];
    let (image, depth, masks) = paint(&shapes, 0);
    let trajectories = TrajectoryDocument {
        version: TrajectoryDocument::VERSION,
        frames: 16,
        resolution: [DEFAULT_HEIGHT, DEFAULT_WIDTH],
        objects: vec![
            TrajectorySpec::anchor(BACKGROUND),
            TrajectorySpec::moving(
                BALL,
                vec![Waypoint::new(140.0, 180.0, 0.7), Waypoint::new(260.0, 160.0, 0.8), Waypoint::new(360.0, 200.0, 0.85)],
            ),
            TrajectorySpec::moving(BOX, vec![Waypoint::new(370.0, 145.0, 0.55), Waypoint::new(250.0, 150.0, 0.35)]),
        ],
    };
    DemoScene { image, depth, masks, trajectories }
}

/// A VOS-style annotated clip: the ball rolls right, the box drifts down and
/// grows nearer, and the sign is hidden behind the box for a few frames.
pub fn demo_vos_sequence(frames: usize) -> (Vec<InstanceMaskFrame>, Vec<DepthMap>) {
    let mut masks = Vec::with_capacity(frames);
    let mut depths = Vec::with_capacity(frames);
    for t in 0..frames {
        let f = t as f64;
        let mut shapes = vec![
            Shape { id: BALL, d: 0.7, inside: disk(100.0 + 12.0 * f, 190.0, 35.0) },
        ];
        if !(5..8).contains(&t) {
            shapes.push(Shape { id: SIGN, d: 0.3, inside: rect(430.0, 40.0, 470.0, 70.0) });
        }
        let half = 40.0 + 2.0 * f;
        shapes.push(Shape {
            id: BOX,
            d: (0.5 + 0.02 * f as f32).min(1.0),
            inside: rect(380.0 - half, 60.0 + 4.0 * f - half * 0.5, 380.0 + half, 60.0 + 4.0 * f + half),
        });
        let (_, d, m) = paint(&shapes, t);
        masks.push(m);
        depths.push(d);
    }
    (masks, depths)
}
