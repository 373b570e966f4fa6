//! Small geometric helpers shared by every stage.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

pub type Point3 = nalgebra::Point3<f64>;
pub type Point2 = nalgebra::Point2<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;

/// Wraps an angle into (-π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Signed difference `to - from` along the shorter arc, in (-π, π].
pub fn shortest_arc(from: f64, to: f64) -> f64 {
    normalize_angle(to - from)
}

pub fn planar_distance(a: &Point3, b: &Point3) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

pub fn planar(p: &Point3) -> Point2 {
    Point2::new(p.x, p.y)
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point3,
    pub max: Point3,
}

impl Bounds {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut min = *first;
        let mut max = *first;
        for p in iter {
            for i in 0..3 {
                min[i] = min[i].min(p[i]);
                max[i] = max[i].max(p[i]);
            }
        }
        Some(Bounds { min, max })
    }

    pub fn extent(&self) -> Vector3 {
        self.max - self.min
    }
}

type CellKey = (i64, i64, i64);

/// Uniform hash grid over a fixed point set, used for nearest-point and
/// line-of-sight queries against the structure model.
#[derive(Debug, Clone)]
pub struct PointGrid {
    cell: f64,
    points: Vec<Point3>,
    cells: HashMap<CellKey, Vec<usize>>,
}

impl PointGrid {
    pub fn new(points: &[Point3], cell: f64) -> Self {
        assert!(cell > 0.0, "grid cell size must be positive");
        let mut cells: HashMap<CellKey, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(key(p, cell)).or_default().push(i);
        }
        PointGrid {
            cell,
            points: points.to_vec(),
            cells,
        }
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance to the nearest stored point, or `None` for an empty grid.
    pub fn nearest_distance(&self, p: &Point3) -> Option<f64> {
        self.nearest(p).map(|(_, d)| d)
    }

    /// Index of and distance to the nearest stored point.
    pub fn nearest(&self, p: &Point3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let center = key(p, self.cell);
        let mut best: Option<(usize, f64)> = None;
        let mut ring: i64 = 0;
        loop {
            for k in shell(center, ring) {
                if let Some(ids) = self.cells.get(&k) {
                    for &i in ids {
                        let d = (self.points[i] - p).norm();
                        if best.is_none_or(|(bi, bd)| d < bd || (d == bd && i < bi)) {
                            best = Some((i, d));
                        }
                    }
                }
            }
            // Every point outside the searched cube is at least `ring * cell` away.
            if let Some((_, d)) = best {
                if d <= ring as f64 * self.cell {
                    return best;
                }
            }
            ring += 1;
            if ring > 1 && self.cells.len() < shell_len(ring) {
                // Sparse grid relative to the shell size: brute force is cheaper.
                return self.brute_nearest(p);
            }
        }
    }

    fn brute_nearest(&self, p: &Point3) -> Option<(usize, f64)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, q)| (i, (q - p).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    /// Indices of points within `radius` of `p`.
    pub fn within(&self, p: &Point3, radius: f64) -> Vec<usize> {
        let r = (radius / self.cell).ceil() as i64;
        let c = key(p, self.cell);
        let mut out = Vec::new();
        for dx in -r..=r {
            for dy in -r..=r {
                for dz in -r..=r {
                    if let Some(ids) = self.cells.get(&(c.0 + dx, c.1 + dy, c.2 + dz)) {
                        out.extend(ids.iter().copied().filter(|&i| (self.points[i] - p).norm() <= radius));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Returns true if any stored point other than those within `exclude_radius`
    /// of `to` lies within `radius` of the open segment `from -> to` and is
    /// strictly closer to `from` than `to` is.
    pub fn blocks_segment(&self, from: &Point3, to: &Point3, radius: f64, exclude_radius: f64) -> bool {
        let seg = to - from;
        let len = seg.norm();
        if len == 0.0 {
            return false;
        }
        let dir = seg / len;
        // March along the segment; each step covers the cells that can hold
        // a point within `radius` of the stretch of segment around it.
        let steps = ((len / self.cell).ceil() as usize).max(1);
        let pad = ((radius + 0.5 * self.cell) / self.cell).ceil() as i64;
        let mut visited: HashSet<CellKey> = HashSet::new();
        for s in 0..=steps {
            let c = key(&(from + dir * (len * s as f64 / steps as f64)), self.cell);
            for dx in -pad..=pad {
                for dy in -pad..=pad {
                    for dz in -pad..=pad {
                        let k = (c.0 + dx, c.1 + dy, c.2 + dz);
                        let Some(ids) = self.cells.get(&k) else {
                            continue;
                        };
                        if !visited.insert(k) {
                            continue;
                        }
                        for &i in ids {
                            let q = &self.points[i];
                            if (q - to).norm() <= exclude_radius || (q - from).norm() >= len {
                                continue;
                            }
                            if segment_distance(q, from, &dir, len) < radius {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }
}

fn segment_distance(q: &Point3, from: &Point3, dir: &Vector3, len: f64) -> f64 {
    let t = (q - from).dot(dir).clamp(0.0, len);
    (q - (from + dir * t)).norm()
}

fn key(p: &Point3, cell: f64) -> CellKey {
    (
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    )
}

fn shell_len(ring: i64) -> usize {
    let side = (2 * ring + 1) as usize;
    let inner = (2 * ring - 1).max(0) as usize;
    side.pow(3) - inner.pow(3)
}

fn shell(c: CellKey, ring: i64) -> impl Iterator<Item = CellKey> {
    let r = ring;
    (-r..=r).flat_map(move |dx| {
        (-r..=r).flat_map(move |dy| {
            (-r..=r).filter_map(move |dz| {
                (dx.abs() == r || dy.abs() == r || dz.abs() == r).then_some((c.0 + dx, c.1 + dy, c.2 + dz))
            })
        })
    })
}
