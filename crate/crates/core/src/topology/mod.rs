//! Loop (branch) detection within a slice.
//!
//! The number of loops is the number of connected components of the graph
//! joining points closer than `d_min`. It is computed from the zero
//! eigenvalues of the graph Laplacian (after contracting grid-cell cliques)
//! and cross-checked with union-find on the full graph;
//! k-means with that `k` then partitions the points, repaired so that
//! every cluster is a union of whole components.

pub mod kmeans;
pub mod spectral;
pub mod union_find;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Point2, Point3};
use crate::slicer::Slice;

pub use spectral::ZERO_EIGEN_TOL;

/// One closed cross-section of a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    pub points: Vec<Point3>,
    pub center: Point2,
    /// Angle of each point about `center`, in (-π, π].
    pub radial_angles: Vec<f64>,
}

impl Loop {
    pub fn from_points(points: Vec<Point3>) -> Self {
        let n = points.len().max(1) as f64;
        let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        let center = Point2::new(sx / n, sy / n);
        let radial_angles = points.iter().map(|p| radial_angle(p, &center)).collect();
        Loop {
            points,
            center,
            radial_angles,
        }
    }
}

pub fn radial_angle(p: &Point3, center: &Point2) -> f64 {
    normalize_angle((p.y - center.y).atan2(p.x - center.x))
}

/// The loops found in one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceLoopSet {
    pub slice_index: usize,
    pub lambda: f64,
    pub loops: Vec<Loop>,
}

impl SliceLoopSet {
    pub fn k(&self) -> usize {
        self.loops.len()
    }
}

/// Replaces clusters of points closer than `d_min / 4` by their centroid.
///
/// Passes repeat until no two output points are closer than the merge pitch.
pub fn merge_near_points(slice: &Slice, d_min: f64) -> Slice {
    let pitch = d_min / 4.0;
    let mut points = slice.points.clone();
    if pitch <= 0.0 {
        return slice.clone();
    }
    loop {
        let (merged, changed) = merge_pass(&points, pitch);
        points = merged;
        if !changed {
            break;
        }
    }
    Slice {
        index: slice.index,
        lambda: slice.lambda,
        points,
    }
}

fn merge_pass(points: &[Point3], pitch: f64) -> (Vec<Point3>, bool) {
    let cell = |p: &Point3| ((p.x / pitch).floor() as i64, (p.y / pitch).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let mut used = vec![false; points.len()];
    let mut out = Vec::with_capacity(points.len());
    let mut changed = false;
    for i in 0..points.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let p = points[i];
        let (cx, cy) = cell(&p);
        let mut group = vec![i];
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in ids {
                        if !used[j] && (points[j].x - p.x).hypot(points[j].y - p.y) < pitch {
                            used[j] = true;
                            group.push(j);
                        }
                    }
                }
            }
        }
        if group.len() == 1 {
            out.push(p);
        } else {
            changed = true;
            group.sort_unstable();
            let n = group.len() as f64;
            let (sx, sy) = group
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &j| (sx + points[j].x, sy + points[j].y));
            out.push(Point3::new(sx / n, sy / n, p.z));
        }
    }
    (out, changed)
}

/// Counts loops in a slice, asserting that the Laplacian and union-find
/// counts agree.
pub fn count_loops(slice: &Slice, d_min: f64) -> Result<usize> {
    if slice.points.is_empty() {
        return Ok(0);
    }
    let pairs = spectral::adjacency_pairs(&slice.points, d_min);
    let (cells, edges) = spectral::contract_cells(&slice.points, &pairs, d_min);
    let spectral = spectral::spectral_component_count(cells, &edges);
    let (components, _) = spectral::component_labels(slice.points.len(), &pairs);
    if spectral != components {
        return Err(Error::LoopCountMismatch { spectral, components });
    }
    Ok(components)
}

/// Partitions a slice into `k` loops with k-means, then repairs the result
/// so that no connected component is split between loops.
pub fn cluster_loops(slice: &Slice, k: usize, d_min: f64, seed: u64) -> Result<SliceLoopSet> {
    let n = slice.points.len();
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, points: n });
    }
    let planar: Vec<Point2> = slice.points.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let km = kmeans::kmeans(&planar, k, seed);

    let pairs = spectral::adjacency_pairs(&slice.points, d_min);
    let (ncomp, comp) = spectral::component_labels(n, &pairs);
    // votes[c][cluster] = points of component c that k-means put in `cluster`
    let mut votes = vec![vec![0usize; k]; ncomp];
    for (c, &a) in comp.iter().zip(&km.assignment) {
        votes[*c][a] += 1;
    }
    let comp_cluster = if ncomp == k {
        unique_assignment(&votes)
    } else {
        votes
            .iter()
            .map(|v| {
                // argmax, lowest cluster index on ties
                let mut best = 0;
                for (i, &c) in v.iter().enumerate() {
                    if c > v[best] {
                        best = i;
                    }
                }
                best
            })
            .collect()
    };

    let mut members: Vec<Vec<Point3>> = vec![Vec::new(); k];
    for (p, c) in slice.points.iter().zip(&comp) {
        members[comp_cluster[*c]].push(*p);
    }
    let loops = members
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(Loop::from_points)
        .collect();
    Ok(SliceLoopSet {
        slice_index: slice.index,
        lambda: slice.lambda,
        loops,
    })
}

/// One-to-one component to cluster matching, greedily by vote count.
fn unique_assignment(votes: &[Vec<usize>]) -> Vec<usize> {
    let mut cells: Vec<(usize, usize, usize)> = Vec::new();
    for (c, v) in votes.iter().enumerate() {
        for (k, &n) in v.iter().enumerate() {
            cells.push((n, c, k));
        }
    }
    cells.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![usize::MAX; votes.len()];
    let mut taken = vec![false; votes.first().map_or(0, Vec::len)];
    for (_, c, k) in cells {
        if out[c] == usize::MAX && !taken[k] {
            out[c] = k;
            taken[k] = true;
        }
    }
    out
}

/// Merge, count and cluster one slice. Empty slices give an empty loop set.
pub fn analyze_slice(slice: &Slice, d_min: f64, seed: u64) -> Result<SliceLoopSet> {
    let merged = merge_near_points(slice, d_min);
    let k = count_loops(&merged, d_min)?;
    if k == 0 {
        return Ok(SliceLoopSet {
            slice_index: slice.index,
            lambda: slice.lambda,
            loops: Vec::new(),
        });
    }
    cluster_loops(&merged, k, d_min, seed)
}

pub fn analyze_slices(slices: &[Slice], d_min: f64, seed: u64) -> Result<Vec<SliceLoopSet>> {
    slices.iter().map(|s| analyze_slice(s, d_min, seed)).collect()
}

/// Writes `loops_<slice_index>.txt` with one block per loop.
pub fn dump_loops(dir: &Path, sets: &[SliceLoopSet]) -> Result<()> {
    for set in sets {
        let mut out = String::new();
        for (id, l) in set.loops.iter().enumerate() {
            let _ = writeln!(out, "# loop {id} center {} {}", l.center.x, l.center.y);
            for p in &l.points {
                let _ = writeln!(out, "{id} {} {} {}", p.x, p.y, p.z);
            }
        }
        let path = dir.join(format!("loops_{}.txt", set.slice_index));
        std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
