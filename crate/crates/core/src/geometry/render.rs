use super::camera::CameraIntrinsics;
use super::cloud::LabeledPointCloud;
use super::raster::{pixels_labeled, InstanceId, InstanceMaskFrame};

/// Instance labels and nearest depth per pixel. Background pixels hold id 0 and `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderedFrame {
    width: u32,
    height: u32,
    instance_image: Vec<InstanceId>,
    depth_buffer: Vec<f64>,
}

impl RenderedFrame {
    pub fn background(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self { width, height, instance_image: vec![0; n], depth_buffer: vec![f64::INFINITY; n] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn instance_image(&self) -> &[InstanceId] {
        &self.instance_image
    }
    pub fn depth_buffer(&self) -> &[f64] {
        &self.depth_buffer
    }

    #[inline]
    pub fn label(&self, x: u32, y: u32) -> InstanceId {
        self.instance_image[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn depth(&self, x: u32, y: u32) -> f64 {
        self.depth_buffer[(y * self.width + x) as usize]
    }

    pub fn area(&self, id: InstanceId) -> usize {
        self.instance_image.iter().filter(|&&l| l == id).count()
    }

    /// Row-major pixel coordinates labeled `id`.
    pub fn pixels_of(&self, id: InstanceId) -> Vec<[f64; 2]> {
        pixels_labeled(&self.instance_image, self.width, id)
    }

    pub fn to_mask(&self, frame_index: usize) -> InstanceMaskFrame {
        InstanceMaskFrame::new(self.width, self.height, self.instance_image.clone(), frame_index)
            .expect("rendered frame dimensions are consistent")
    }
}

/// Integer offsets of a filled disk `dx² + dy² <= r²`.
pub fn disk_offsets(radius: u32) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Splat every point as a disk and resolve visibility with a z-buffer.
///
/// Projections round half-up to the nearest pixel. Ties in depth go to the
/// lower instance id, then to the earlier point. Points with `Z <= 0` and
/// pixels outside the image are dropped.
pub fn render_instances(cloud: &LabeledPointCloud, cam: &CameraIntrinsics, splat_radius: u32) -> RenderedFrame {
    let (w, h) = (cam.width(), cam.height());
    let mut frame = RenderedFrame::background(w, h);
    let offsets = disk_offsets(splat_radius);

    for (p, &id) in cloud.points().iter().zip(cloud.ids()) {
        let Ok((px, py)) = cam.project(p) else { continue };
        if !(px.is_finite() && py.is_finite()) {
            continue;
        }
        let cx = (px + 0.5).floor() as i64;
        let cy = (py + 0.5).floor() as i64;
        let z = p.z;
        for &(dx, dy) in &offsets {
            let (x, y) = (cx + dx, cy + dy);
            if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                continue;
            }
            let idx = y as usize * w as usize + x as usize;
            let cur_z = frame.depth_buffer[idx];
            if z < cur_z || (z == cur_z && id < frame.instance_image[idx]) {
                frame.depth_buffer[idx] = z;
                frame.instance_image[idx] = id;
            }
        }
    }
    frame
}
