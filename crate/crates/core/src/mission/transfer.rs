use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Point3, PointGrid, Vector3};
use crate::offset::OffsetLoop;

/// Radial push applied per repair iteration, as a fraction of the offset distance.
pub const PUSH_FRACTION: f64 = 0.1;
pub const MAX_PUSH_ITERATIONS: usize = 100;

/// The loop a transfer detours around.
///
/// Surface samples alone cannot tell the inside of a hollow cross-section
/// from the outside, so the obstacle also carries a radial profile: a point
/// whose distance from `center` is below the profile at its bearing is
/// treated as inside and keeps being pushed.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub center: Point2,
    /// (bearing, radius) pairs sorted by bearing in [0, 2π).
    profile: Vec<(f64, f64)>,
}

impl Obstacle {
    /// An obstacle with no known interior.
    pub fn at(center: Point2) -> Self {
        Obstacle { center, profile: Vec::new() }
    }

    /// Uses the waypoints of `lp`, pulled in by `omega`, as the interior boundary.
    pub fn from_loop(lp: &OffsetLoop, omega: f64) -> Self {
        let c = lp.center;
        let mut profile: Vec<(f64, f64)> = lp
            .waypoints
            .iter()
            .map(|w| {
                let d = Point2::new(w.position.x, w.position.y) - c;
                (d.y.atan2(d.x).rem_euclid(TAU), (d.norm() - omega).max(0.0))
            })
            .collect();
        profile.sort_by(|a, b| a.0.total_cmp(&b.0));
        Obstacle { center: c, profile }
    }

    /// Interior radius at the bearing of `p`, interpolated between profile samples.
    pub fn inner_radius(&self, p: &Point3) -> f64 {
        let n = self.profile.len();
        if n == 0 {
            return 0.0;
        }
        if n == 1 {
            return self.profile[0].1;
        }
        let theta = (p.y - self.center.y).atan2(p.x - self.center.x).rem_euclid(TAU);
        let i = self.profile.partition_point(|s| s.0 <= theta);
        let (a, b) = if i == 0 || i == n {
            let (a0, r0) = self.profile[n - 1];
            let (b0, r1) = self.profile[0];
            ((a0 - TAU, r0), (b0, r1))
        } else {
            (self.profile[i - 1], self.profile[i])
        };
        let theta = if theta > b.0 { theta - TAU } else { theta };
        let span = b.0 - a.0;
        if span <= 0.0 {
            return a.1.max(b.1);
        }
        let t = ((theta - a.0) / span).clamp(0.0, 1.0);
        a.1 + (b.1 - a.1) * t
    }

    fn contains(&self, p: &Point3) -> bool {
        let r = ((p.x - self.center.x).powi(2) + (p.y - self.center.y).powi(2)).sqrt();
        r < self.inner_radius(p)
    }
}

/// Straight-line transfer from `from` to `to`, sampled at most `step` apart.
///
/// Interior samples closer than `d_s` to the structure, or inside one of the
/// `obstacles`, are pushed radially away from the center of the obstacle that
/// contains them (or else the nearest one) in increments of `PUSH_FRACTION * omega` until
/// they clear `d_s`. Legs stretched beyond `step` by the push are split and
/// the new midpoints repaired the same way, so consecutive points stay at
/// most `step` apart. The end points are kept as given.
pub fn build_transfer(
    from: Point3,
    to: Point3,
    structure: &PointGrid,
    d_s: f64,
    obstacles: &[Obstacle],
    omega: f64,
    step: f64,
) -> Result<Vec<Point3>> {
    let len = (to - from).norm();
    if len == 0.0 {
        return Ok(vec![from]);
    }
    let n = ((len / step).ceil() as usize).max(1);
    let mut points: Vec<Point3> = (0..=n)
        .map(|i| match i {
            0 => from,
            i if i == n => to,
            i => from + (to - from) * (i as f64 / n as f64),
        })
        .collect();
    // A profile that holds either end point is stale at this height.
    let obstacles: Vec<Obstacle> = obstacles
        .iter()
        .filter(|o| !o.contains(&from) && !o.contains(&to))
        .cloned()
        .collect();
    let push = PUSH_FRACTION * omega;
    let mut repaired = vec![false; points.len()];
    repaired[0] = true;
    repaired[n] = true;
    loop {
        for i in 0..points.len() {
            if !repaired[i] {
                points[i] = push_clear(points[i], &from, structure, d_s, &obstacles, push)?;
                repaired[i] = true;
            }
        }
        let mut split = false;
        let mut next = Vec::with_capacity(points.len());
        let mut flags = Vec::with_capacity(points.len());
        for i in 0..points.len() {
            if i > 0 && (points[i] - points[i - 1]).norm() > step * (1.0 + 1e-9) {
                next.push(points[i - 1] + (points[i] - points[i - 1]) * 0.5);
                flags.push(false);
                split = true;
            }
            next.push(points[i]);
            flags.push(repaired[i]);
        }
        points = next;
        repaired = flags;
        if !split {
            return Ok(points);
        }
        if points.len() > 64 * (n + 1) {
            return Err(Error::TransferInfeasible {
                clearance: f64::NAN,
                d_s,
                iterations: MAX_PUSH_ITERATIONS,
            });
        }
    }
}

fn push_clear(
    mut p: Point3,
    from: &Point3,
    structure: &PointGrid,
    d_s: f64,
    obstacles: &[Obstacle],
    push: f64,
) -> Result<Point3> {
    let mut iterations = 0;
    loop {
        let clearance = structure.nearest_distance(&p).unwrap_or(f64::INFINITY);
        let inside = obstacles.iter().find(|o| o.contains(&p));
        if clearance >= d_s && inside.is_none() {
            return Ok(p);
        }
        if iterations == MAX_PUSH_ITERATIONS {
            return Err(Error::TransferInfeasible {
                clearance,
                d_s,
                iterations,
            });
        }
        let center = match inside {
            Some(o) => o.center,
            None => nearest_center(&p, obstacles),
        };
        p += radial_direction(&p, from, &center) * push;
        iterations += 1;
    }
}

fn nearest_center(p: &Point3, obstacles: &[Obstacle]) -> Point2 {
    let d = |c: &Point2| (p.x - c.x).powi(2) + (p.y - c.y).powi(2);
    obstacles
        .iter()
        .map(|o| o.center)
        .min_by(|a, b| d(a).total_cmp(&d(b)))
        .unwrap_or_else(|| Point2::new(p.x, p.y))
}

fn radial_direction(p: &Point3, from: &Point3, center: &Point2) -> Vector3 {
    let mut d = Vector3::new(p.x - center.x, p.y - center.y, 0.0);
    if d.norm() < 1e-12 {
        d = Vector3::new(from.x - center.x, from.y - center.y, 0.0);
    }
    if d.norm() < 1e-12 {
        d = Vector3::x();
    }
    d.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn pillar(r: f64) -> PointGrid {
        let mut pts = Vec::new();
        for k in 0..=40 {
            for i in 0..64 {
                let a = i as f64 / 64.0 * TAU;
                pts.push(Point3::new(r * a.cos(), r * a.sin(), k as f64 * 0.1));
            }
        }
        PointGrid::new(&pts, 0.5)
    }

    fn ring(r: f64) -> Obstacle {
        let profile = (0..64).map(|i| (i as f64 / 64.0 * TAU, r)).collect();
        Obstacle { center: Point2::origin(), profile }
    }

    #[test]
    fn inner_radius_interpolates_across_wrap() {
        let ob = Obstacle {
            center: Point2::origin(),
            profile: vec![(0.5, 1.0), (TAU - 0.5, 2.0)],
        };
        assert!((ob.inner_radius(&Point3::new(1.0, 0.0, 0.0)) - 1.5).abs() < 1e-12);
        assert!((ob.inner_radius(&Point3::new(-1.0, 0.0, 0.0)) - 1.5).abs() < 1e-12);
        assert_eq!(Obstacle::at(Point2::origin()).inner_radius(&Point3::origin()), 0.0);
    }

    #[test]
    fn hollow_interior_is_left() {
        let grid = pillar(1.0);
        let p = Point3::new(0.0, 0.2, 2.0);
        let q = push_clear(p, &p, &grid, 0.5, &[ring(1.0)], 0.1).unwrap();
        assert!(q.y > 1.5 - 1e-9, "{q:?}");
        let kept = push_clear(p, &p, &grid, 0.5, &[Obstacle::at(Point2::origin())], 0.1).unwrap();
        assert_eq!(kept, p);
    }

    #[test]
    fn clear_line_is_uniform() {
        let grid = pillar(1.0);
        let from = Point3::new(3.0, -2.0, 2.0);
        let to = Point3::new(3.0, 2.0, 2.0);
        let path = build_transfer(from, to, &grid, 0.5, &[Obstacle::at(Point2::origin())], 1.0, 0.5).unwrap();
        assert_eq!(path.len(), 9);
        for (i, p) in path.iter().enumerate() {
            let expect = from + (to - from) * (i as f64 / 8.0);
            assert!((p - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn line_through_pillar_is_repaired() {
        let grid = pillar(1.0);
        let from = Point3::new(-2.0, 0.3, 2.0);
        let to = Point3::new(2.0, 0.3, 2.0);
        let path = build_transfer(from, to, &grid, 0.5, &[ring(1.0)], 1.0, 0.25).unwrap();
        for w in path.windows(2) {
            assert!((w[1] - w[0]).norm() <= 0.25 + 1e-9);
        }
        for p in &path {
            // brute-force nearest structure point
            let c = grid.points().iter().map(|q| (q - p).norm()).fold(f64::INFINITY, f64::min);
            assert!(c >= 0.5 - 1e-12, "clearance {c}");
        }
    }

    #[test]
    fn line_through_two_hollow_pillars() {
        let mut pts = Vec::new();
        for cx in [-3.0, 3.0] {
            for k in 0..=40 {
                for i in 0..64 {
                    let a = i as f64 / 64.0 * TAU;
                    pts.push(Point3::new(cx + a.cos(), a.sin(), k as f64 * 0.1));
                }
            }
        }
        let grid = PointGrid::new(&pts, 0.5);
        let obstacles: Vec<Obstacle> = [-3.0, 3.0]
            .iter()
            .map(|&cx| Obstacle {
                center: Point2::new(cx, 0.0),
                profile: (0..64).map(|i| (i as f64 / 64.0 * TAU, 1.0)).collect(),
            })
            .collect();
        let from = Point3::new(-5.0, 0.1, 2.0);
        let to = Point3::new(5.0, -0.1, 2.0);
        let path = build_transfer(from, to, &grid, 0.5, &obstacles, 1.0, 0.25).unwrap();
        for w in path.windows(2) {
            assert!((w[1] - w[0]).norm() <= 0.25 + 1e-9);
            let mid = w[0] + (w[1] - w[0]) * 0.5;
            for cx in [-3.0f64, 3.0] {
                assert!(((mid.x - cx).powi(2) + mid.y.powi(2)).sqrt() > 1.4, "{mid:?}");
            }
        }
    }

    #[test]
    fn same_point() {
        let grid = pillar(1.0);
        let p = Point3::new(2.0, 0.0, 1.0);
        assert_eq!(build_transfer(p, p, &grid, 0.5, &[Obstacle::at(Point2::origin())], 1.0, 0.5).unwrap(), vec![p]);
    }

    #[test]
    fn infeasible_when_push_cannot_clear() {
        // A huge slab around the center: pushing 100 * 0.01 m cannot escape it.
        let mut pts = Vec::new();
        for i in -40..=40 {
            for j in -40..=40 {
                pts.push(Point3::new(i as f64 * 0.1, j as f64 * 0.1, 0.0));
            }
        }
        let grid = PointGrid::new(&pts, 0.5);
        let r = build_transfer(
            Point3::new(-5.0, 0.0, 0.1),
            Point3::new(5.0, 0.0, 0.1),
            &grid,
            0.5,
            &[Obstacle::at(Point2::new(0.0, 10.0))],
            0.1,
            0.5,
        );
        assert!(matches!(r, Err(Error::TransferInfeasible { .. })));
    }
}
