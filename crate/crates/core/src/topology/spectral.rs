use std::collections::HashMap;

use nalgebra::DMatrix;

use super::union_find::UnionFind;
use crate::geometry::Point3;

/// Eigenvalues with magnitude below this count as zero.
pub const ZERO_EIGEN_TOL: f64 = 1e-8;

/// Pairs `(i, j)`, `i < j`, whose planar distance is below `d_min`.
pub fn adjacency_pairs(points: &[Point3], d_min: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(a.cmp(&b)));
    let mut pairs = Vec::new();
    // Sweep along x; only points within d_min in x can be adjacent.
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[oi + 1..] {
            if points[j].x - points[i].x >= d_min {
                break;
            }
            let d = (points[i].x - points[j].x).hypot(points[i].y - points[j].y);
            if d < d_min {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Graph Laplacian `D - A` of the adjacency graph.
pub fn laplacian(n: usize, pairs: &[(usize, usize)]) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for &(i, j) in pairs {
        l[(i, j)] -= 1.0;
        l[(j, i)] -= 1.0;
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
    }
    l
}

/// Number of (numerically) zero Laplacian eigenvalues.
pub fn spectral_component_count(n: usize, pairs: &[(usize, usize)]) -> usize {
    if n == 0 {
        return 0;
    }
    let l = laplacian(n, pairs);
    let eig = l.symmetric_eigenvalues();
    eig.iter().filter(|v| v.abs() < ZERO_EIGEN_TOL).count()
}

/// Contracts the adjacency graph onto grid cells of side `d_min / 2`.
///
/// Points sharing a cell are closer than `d_min` to each other, so every
/// cell is a clique and contracting it leaves the component structure
/// unchanged. Returns the cell count and the edges between distinct cells.
pub fn contract_cells(points: &[Point3], pairs: &[(usize, usize)], d_min: f64) -> (usize, Vec<(usize, usize)>) {
    let side = d_min / 2.0;
    let mut ids: HashMap<(i64, i64), usize> = HashMap::new();
    let cell: Vec<usize> = points
        .iter()
        .map(|p| {
            let key = ((p.x / side).floor() as i64, (p.y / side).floor() as i64);
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        })
        .collect();
    let mut edges: Vec<(usize, usize)> = pairs
        .iter()
        .map(|&(i, j)| (cell[i].min(cell[j]), cell[i].max(cell[j])))
        .filter(|(a, b)| a != b)
        .collect();
    edges.sort_unstable();
    edges.dedup();
    (ids.len(), edges)
}

/// Component labels from union-find over the same edge list.
pub fn component_labels(n: usize, pairs: &[(usize, usize)]) -> (usize, Vec<usize>) {
    let mut uf = UnionFind::new(n);
    for &(i, j) in pairs {
        uf.union(i, j);
    }
    (uf.set_count(), uf.labels())
}
