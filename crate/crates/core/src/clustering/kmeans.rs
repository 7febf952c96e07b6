use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use super::rng::XorShift64Star;
use crate::error::{Error, Result};

const RESTARTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once no center moves farther than this (pixels).
    pub tol: f64,
    /// Independent seedings drawn from one generator stream; the lowest-SSE run wins.
    pub restarts: usize,
    /// Use the run-based assignment for integer pixel inputs. Output is identical
    /// either way; this only exists so tests can compare the two paths.
    #[serde(skip, default = "enabled")]
    pub lattice: bool,
}

fn enabled() -> bool {
    true
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { seed: 0, max_iters: 50, tol: 1e-4, restarts: RESTARTS, lattice: true }
    }
}

impl KMeansConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::validation("kmeans.max_iters", "must be at least 1"));
        }
        if self.restarts < 1 {
            return Err(Error::validation("kmeans.restarts", "must be at least 1"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::validation("kmeans.tol", format!("must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[inline]
pub(super) fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Squared-distance-weighted seeding from the documented generator.
fn plus_plus_init(points: &[[f64; 2]], k: usize, rng: &mut XorShift64Star) -> Vec<[f64; 2]> {
    let n = points.len();
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.below(n)]);
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();

    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            let mut last_positive = 0;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                last_positive = i;
                acc += w;
                if acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or(last_positive)
        } else {
            rng.below(n)
        };
        let c = points[pick];
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(dist2(p, &c));
        }
        centers.push(c);
    }
    centers
}

/// Index of the nearest center and its squared distance; ties go to the lower index.
#[inline]
fn nearest(p: &[f64; 2], centers: &[[f64; 2]]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = dist2(p, &centers[0]);
    for (j, c) in centers.iter().enumerate().skip(1) {
        let d = dist2(p, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    (best, best_d)
}

/// Assign every point to its nearest center, recording the squared distance.
fn assign_points(
    points: &[[f64; 2]],
    centers: &[[f64; 2]],
    sums: &mut [[f64; 2]],
    counts: &mut [usize],
    assign_d: &mut [f64],
) {
    for (p, slot) in points.iter().zip(assign_d.iter_mut()) {
        let (j, d) = nearest(p, centers);
        *slot = d;
        sums[j][0] += p[0];
        sums[j][1] += p[1];
        counts[j] += 1;
    }
}

fn lloyd(points: &[[f64; 2]], lattice: Option<&Lattice>, mut centers: Vec<[f64; 2]>, cfg: &KMeansConfig) -> Vec<[f64; 2]> {
    let k = centers.len();
    let mut assign_d = vec![0f64; points.len()];

    for _ in 0..cfg.max_iters {
        let mut sums = vec![[0f64; 2]; k];
        let mut counts = vec![0usize; k];
        match lattice {
            Some(l) => {
                l.accumulate(&centers, &mut sums, &mut counts);
                if counts.contains(&0) {
                    // refilling needs per-point distances
                    sums.fill([0.0; 2]);
                    counts.fill(0);
                    assign_points(points, &centers, &mut sums, &mut counts, &mut assign_d);
                }
            }
            None => assign_points(points, &centers, &mut sums, &mut counts, &mut assign_d),
        }

        let mut next: Vec<[f64; 2]> = sums
            .iter()
            .zip(&counts)
            .zip(&centers)
            .map(|((s, &c), old)| if c == 0 { *old } else { [s[0] / c as f64, s[1] / c as f64] })
            .collect();
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let mut far = 0;
            for i in 1..points.len() {
                if assign_d[i] > assign_d[far] {
                    far = i;
                }
            }
            next[j] = points[far];
            // the donor point now sits on a center; don't pick it twice
            assign_d[far] = 0.0;
        }

        let shift = centers
            .iter()
            .zip(&next)
            .map(|(a, b)| dist2(a, b))
            .fold(0.0f64, f64::max)
            .sqrt();
        centers = next;
        if shift < cfg.tol {
            break;
        }
    }

    centers
}

/// Lloyd's algorithm from k-means++ seeding.
///
/// Centers are continuous means sorted by `(y, x)`. An emptied cluster is
/// re-seeded with the point farthest from its current center.
pub fn kmeans_points(points: &[[f64; 2]], k: usize, cfg: &KMeansConfig) -> Result<Vec<[f64; 2]>> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if k == 0 {
        return Err(Error::validation("k", "must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::InfeasibleK { k, points: points.len() });
    }

    let mut rng = XorShift64Star::new(cfg.seed);
    let lattice = if cfg.lattice { Lattice::detect(points) } else { None };
    let mut best: Option<(f64, Vec<[f64; 2]>)> = None;
    for _ in 0..cfg.restarts {
        let init = plus_plus_init(points, k, &mut rng);
        let centers = lloyd(points, lattice.as_ref(), init, cfg);
        let cost = sse(points, &centers);
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, centers));
        }
    }
    let mut centers = best.expect("restarts >= 1").1;
    centers.sort_by(|a, b| a[1].total_cmp(&b[1]).then(a[0].total_cmp(&b[0])));
    Ok(centers)
}

/// Sum of squared distances from each point to its nearest center.
pub fn sse(points: &[[f64; 2]], centers: &[[f64; 2]]) -> f64 {
    points.iter().map(|p| nearest(p, centers).1).sum()
}
