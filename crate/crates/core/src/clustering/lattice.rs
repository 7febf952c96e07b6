//! Exact Lloyd assignment for points on the integer pixel lattice.
//!
//! Mask pixels come in horizontal runs. Along a run the difference between the
//! squared distances to two centers is linear in `x`, so when one center wins
//! with a clear margin at both ends of a span it wins everywhere inside it.
//! Spans without a clear margin are bisected and finally evaluated per pixel
//! with the same arithmetic as the generic path. Coordinate sums are integers
//! and therefore exact in any order, so the result is bit-identical to a
//! per-point pass.

use super::kmeans::dist2;

/// Below this many points the per-point path is cheaper.
const MIN_POINTS: usize = 64;
const MAX_COORD: f64 = (1u64 << 24) as f64;
/// Relative margin, far above the rounding error of `dx² + dy²`.
const MARGIN: f64 = 1e-12;
const LEAF: i64 = 4;

#[derive(Clone, Copy, Debug)]
struct Run {
    y: i64,
    x0: i64,
    x1: i64,
}

#[derive(Debug)]
pub(super) struct Lattice {
    runs: Vec<Run>,
}

impl Lattice {
    /// `Some` when every point is a distinct integer pixel.
    pub(super) fn detect(points: &[[f64; 2]]) -> Option<Self> {
        if points.len() < MIN_POINTS || points.len() >= 1 << 28 {
            return None;
        }
        let mut cells = Vec::with_capacity(points.len());
        for p in points {
            if p[0].fract() != 0.0 || p[1].fract() != 0.0 || p[0].abs() > MAX_COORD || p[1].abs() > MAX_COORD {
                return None;
            }
            cells.push((p[1] as i64, p[0] as i64));
        }
        cells.sort_unstable();
        let mut runs: Vec<Run> = Vec::new();
        for (i, &(y, x)) in cells.iter().enumerate() {
            if i > 0 && cells[i - 1] == (y, x) {
                return None;
            }
            match runs.last_mut() {
                Some(r) if r.y == y && r.x1 + 1 == x => r.x1 = x,
                _ => runs.push(Run { y, x0: x, x1: x }),
            }
        }
        Some(Self { runs })
    }

    /// Per-center coordinate sums and counts under nearest-center assignment
    /// (ties to the lower index).
    pub(super) fn accumulate(&self, centers: &[[f64; 2]], sums: &mut [[f64; 2]], counts: &mut [usize]) {
        let k = centers.len();
        let mut da = vec![0f64; k];
        let mut db = vec![0f64; k];
        let mut stack = Vec::new();
        for run in &self.runs {
            let y = run.y as f64;
            let mut a = run.x0;
            while a <= run.x1 {
                let w = distances([a as f64, y], centers, &mut da);
                if !clear_margin(&da, w) {
                    add_span(sums, counts, w, a, a, y);
                    a += 1;
                    continue;
                }
                let end = next_cut(centers, w, y, a).min(run.x1);
                if end <= a {
                    add_span(sums, counts, w, a, a, y);
                    a += 1;
                    continue;
                }
                let wb = distances([end as f64, y], centers, &mut db);
                if wb == w && clear_margin(&db, w) {
                    add_span(sums, counts, w, a, end, y);
                } else {
                    bisect(centers, y, a, end, sums, counts, &mut da, &mut db, &mut stack);
                }
                a = end + 1;
            }
        }
    }
}

/// Last pixel before the first center to the right of `a` could overtake `w`.
fn next_cut(centers: &[[f64; 2]], w: usize, y: f64, a: i64) -> i64 {
    let cw = centers[w];
    let dyw = (y - cw[1]) * (y - cw[1]);
    let mut cut = f64::INFINITY;
    for (j, cj) in centers.iter().enumerate() {
        if j == w || cj[0] <= cw[0] {
            continue;
        }
        let dyj = (y - cj[1]) * (y - cj[1]);
        // (x - cj)² + dyj = (x - cw)² + dyw
        let x = (cj[0] * cj[0] - cw[0] * cw[0] + dyj - dyw) / (2.0 * (cj[0] - cw[0]));
        if x < cut {
            cut = x;
        }
    }
    if cut >= i64::MAX as f64 / 2.0 {
        i64::MAX
    } else if cut <= a as f64 {
        a
    } else {
        cut.ceil() as i64 - 1
    }
}

#[allow(clippy::too_many_arguments)]
fn bisect(
    centers: &[[f64; 2]],
    y: f64,
    a: i64,
    b: i64,
    sums: &mut [[f64; 2]],
    counts: &mut [usize],
    da: &mut [f64],
    db: &mut [f64],
    stack: &mut Vec<(i64, i64)>,
) {
    stack.push((a, b));
    while let Some((a, b)) = stack.pop() {
        let wa = distances([a as f64, y], centers, da);
        if a == b {
            add_span(sums, counts, wa, a, a, y);
            continue;
        }
        let wb = distances([b as f64, y], centers, db);
        if wa == wb && clear_margin(da, wa) && clear_margin(db, wb) {
            add_span(sums, counts, wa, a, b, y);
        } else if b - a < LEAF {
            for x in a..=b {
                let w = distances([x as f64, y], centers, da);
                add_span(sums, counts, w, x, x, y);
            }
        } else {
            let mid = a + (b - a) / 2;
            stack.push((mid + 1, b));
            stack.push((a, mid));
        }
    }
}

/// Fill `out` with squared distances and return the first minimiser.
#[inline]
fn distances(p: [f64; 2], centers: &[[f64; 2]], out: &mut [f64]) -> usize {
    let mut best = 0;
    for (j, c) in centers.iter().enumerate() {
        out[j] = dist2(&p, c);
        if out[j] < out[best] {
            best = j;
        }
    }
    best
}

#[inline]
fn clear_margin(d: &[f64], winner: usize) -> bool {
    let dw = d[winner];
    d.iter()
        .enumerate()
        .all(|(j, &dj)| j == winner || dj - dw > MARGIN * (dj + dw) + f64::MIN_POSITIVE)
}

#[inline]
fn add_span(sums: &mut [[f64; 2]], counts: &mut [usize], w: usize, a: i64, b: i64, y: f64) {
    let n = (b - a + 1) as i128;
    let sx = (a as i128 + b as i128) * n / 2;
    sums[w][0] += sx as f64;
    sums[w][1] += y * n as f64;
    counts[w] += n as usize;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_only_distinct_integer_points() {
        let grid: Vec<[f64; 2]> = (0..100).map(|i| [(i % 10) as f64, (i / 10) as f64]).collect();
        let l = Lattice::detect(&grid).unwrap();
        assert_eq!(l.runs.len(), 10);
        let mut dup = grid.clone();
        dup.push([3.0, 3.0]);
        assert!(Lattice::detect(&dup).is_none());
        let mut frac = grid.clone();
        frac[5][0] = 0.5;
        assert!(Lattice::detect(&frac).is_none());
        assert!(Lattice::detect(&grid[..10]).is_none());
    }

    #[test]
    fn matches_per_point_sums() {
        let pts: Vec<[f64; 2]> = (0..4000)
            .map(|i| [(i % 80) as f64, (i / 80) as f64])
            .filter(|p| (p[0] - 40.0).powi(2) + (p[1] - 25.0).powi(2) > 81.0)
            .collect();
        let centers = [[10.3, 5.5], [60.0, 40.25], [40.0, 25.0], [40.0, 25.0], [75.1, 2.0]];
        let l = Lattice::detect(&pts).unwrap();
        let mut sums = vec![[0.0; 2]; 5];
        let mut counts = vec![0; 5];
        l.accumulate(&centers, &mut sums, &mut counts);

        let mut ref_sums = vec![[0.0; 2]; 5];
        let mut ref_counts = vec![0; 5];
        let mut scratch = vec![0.0; 5];
        for p in &pts {
            let w = distances(*p, &centers, &mut scratch);
            ref_sums[w][0] += p[0];
            ref_sums[w][1] += p[1];
            ref_counts[w] += 1;
        }
        assert_eq!(counts, ref_counts);
        assert_eq!(sums, ref_sums);
        assert_eq!(counts[3], 0);
    }
}
