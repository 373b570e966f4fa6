//! Lloyd's k-means on planar points with k-means++ seeding.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point2;

const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centers: Vec<Point2>,
    pub assignment: Vec<usize>,
    pub iterations: usize,
}

fn dist2(a: &Point2, b: &Point2) -> f64 {
    (a - b).norm_squared()
}

/// Index of the nearest center; the lowest index wins on ties.
pub fn nearest_center(p: &Point2, centers: &[Point2]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = dist2(p, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// k-means++ initial centers, deterministic for a given seed.
pub fn kmeans_pp_init(points: &[Point2], k: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.gen_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // All remaining points coincide with a center.
            rng.gen_range(0..points.len())
        };
        let c = points[next];
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(dist2(p, &c));
        }
        centers.push(c);
    }
    centers
}

/// Runs Lloyd iterations until no assignment changes.
///
/// Requires `1 <= k <= points.len()`.
pub fn kmeans(points: &[Point2], k: usize, seed: u64) -> KMeans {
    assert!(k >= 1 && k <= points.len());
    let mut centers = kmeans_pp_init(points, k, seed);
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest_center(p, &centers)).collect();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (p, &a) in points.iter().zip(&assignment) {
            sums[a].0 += p.x;
            sums[a].1 += p.y;
            sums[a].2 += 1;
        }
        for (c, s) in centers.iter_mut().zip(&sums) {
            // Empty clusters keep their previous center.
            if s.2 > 0 {
                *c = Point2::new(s.0 / s.2 as f64, s.1 / s.2 as f64);
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest_center(p, &centers)).collect();
        if next == assignment || iterations >= MAX_ITERATIONS {
            break;
        }
        assignment = next;
    }
    KMeans {
        centers,
        assignment,
        iterations,
    }
}
