//! Boundary polygon of the clicked object, for the editor's highlight.

use levictl_core::geometry::{InstanceId, InstanceMaskFrame};

const DIRS: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

fn dir_index(dx: i64, dy: i64) -> usize {
    DIRS.iter().position(|&d| d == (dx, dy)).expect("8-neighbour offset")
}

/// Outer boundary of the 8-connected component of `id` containing `(x, y)`,
/// traced clockwise from its top-left pixel. Empty if the pixel is not `id`.
pub fn trace_outline(mask: &InstanceMaskFrame, id: InstanceId, x: u32, y: u32) -> Vec<[u32; 2]> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && mask.label(x as u32, y as u32) == id;
    if !inside(x as i64, y as i64) {
        return Vec::new();
    }

    // flood fill to find the component's top-left pixel
    let mut seen = vec![false; (w * h) as usize];
    let mut stack = vec![(x as i64, y as i64)];
    seen[(y as i64 * w + x as i64) as usize] = true;
    let mut start = (x as i64, y as i64);
    let mut area = 0usize;
    while let Some((cx, cy)) = stack.pop() {
        area += 1;
        if (cy, cx) < (start.1, start.0) {
            start = (cx, cy);
        }
        for (dx, dy) in DIRS {
            let (nx, ny) = (cx + dx, cy + dy);
            if inside(nx, ny) && !seen[(ny * w + nx) as usize] {
                seen[(ny * w + nx) as usize] = true;
                stack.push((nx, ny));
            }
        }
    }

    // Moore-neighbour tracing; the left neighbour of the top-left pixel is outside
    let mut outline = vec![[start.0 as u32, start.1 as u32]];
    let (mut c, mut back) = (start, 0usize);
    let mut first_step = None;
    while outline.len() <= 4 * area + 4 {
        let Some((d, n)) = (1..=8).map(|i| (back + i) % 8).find_map(|d| {
            let n = (c.0 + DIRS[d].0, c.1 + DIRS[d].1);
            inside(n.0, n.1).then_some((d, n))
        }) else {
            break;
        };
        if c == start {
            match first_step {
                None => first_step = Some(n),
                Some(f) if f == n => break,
                Some(_) => {}
            }
        }
        let prev = (c.0 + DIRS[(d + 7) % 8].0, c.1 + DIRS[(d + 7) % 8].1);
        back = dir_index(prev.0 - n.0, prev.1 - n.1);
        c = n;
        outline.push([c.0 as u32, c.1 as u32]);
    }
    if outline.len() > 1 && outline.last() == outline.first() {
        outline.pop();
    }
    outline
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(rows: &[&str]) -> InstanceMaskFrame {
        let h = rows.len() as u32;
        let w = rows[0].len() as u32;
        let mut m = InstanceMaskFrame::empty(w, h, 0);
        for (y, r) in rows.iter().enumerate() {
            for (x, c) in r.chars().enumerate() {
                if c == '#' {
                    m.set(x as u32, y as u32, 1);
                }
            }
        }
        m
    }

    #[test]
    fn square_boundary() {
        let m = mask_from(&["....", ".##.", ".##.", "...."]);
        assert_eq!(trace_outline(&m, 1, 2, 2), vec![[1, 1], [2, 1], [2, 2], [1, 2]]);
    }

    #[test]
    fn single_pixel_and_miss() {
        let m = mask_from(&["...", ".#.", "..."]);
        assert_eq!(trace_outline(&m, 1, 1, 1), vec![[1, 1]]);
        assert!(trace_outline(&m, 1, 0, 0).is_empty());
    }

    #[test]
    fn ring_traces_outer_boundary_only() {
        let m = mask_from(&["#####", "#...#", "#...#", "#####"]);
        let o = trace_outline(&m, 1, 0, 3);
        assert_eq!(o.len(), 14);
        assert!(o.iter().all(|&[x, y]| x == 0 || y == 0 || x == 4 || y == 3));
    }

    #[test]
    fn thin_line_visits_both_sides() {
        let m = mask_from(&["###"]);
        assert_eq!(trace_outline(&m, 1, 1, 0), vec![[0, 0], [1, 0], [2, 0], [1, 0]]);
    }
}
