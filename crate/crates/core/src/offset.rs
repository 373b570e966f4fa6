//! Offset inspection loops.
//!
//! Every surface point `(x, y)` of a loop is pushed out by `omega` along its
//! radial direction from the loop center:
//! `(x + omega cos θ, y + omega sin θ)` with `θ = atan2(y - y_c, x - x_c)`.
//! Points are ordered by `θ` (counter-clockwise) and thinned to roughly one
//! waypoint per `waypoint_pitch` of offset arc. Within each angular bin the
//! outermost surface point is used, which hides interior points of capped
//! or smeared cross-sections. The yaw of each waypoint faces back toward the
//! structure.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, planar_distance, Point2, Point3};
use crate::topology::{radial_angle, Loop};

/// Fraction of `omega` a waypoint may lose to nearby surface before it is flagged.
pub const CLEARANCE_SLACK: f64 = 0.25;

/// Radial tolerance, as a fraction of `omega`, for treating two surface
/// points in one angular bin as equally outermost.
const OUTERMOST_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint {
    pub position: Point3,
    /// Heading in (-π, π]; the camera looks along it.
    pub yaw: f64,
    /// Angle of the source surface point about the loop center.
    pub radial_angle: f64,
    /// Surface point this waypoint was offset from.
    pub source: Point3,
    pub loop_id: usize,
    pub slice_index: usize,
    /// Set when the waypoint is closer than `omega * (1 - CLEARANCE_SLACK)`
    /// to some surface point.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffsetLoop {
    /// Sorted by strictly increasing radial angle.
    pub waypoints: Vec<Waypoint>,
    pub center: Point2,
    pub slice_index: usize,
    pub loop_id: usize,
    /// Surface points dropped because they coincide with the center.
    pub skipped: usize,
}

impl OffsetLoop {
    /// Closed-loop length of the waypoint polygon.
    pub fn perimeter(&self) -> f64 {
        let n = self.waypoints.len();
        (0..n)
            .map(|i| planar_distance(&self.waypoints[i].position, &self.waypoints[(i + 1) % n].position))
            .sum()
    }

    pub fn flagged_count(&self) -> usize {
        self.waypoints.iter().filter(|w| w.flagged).count()
    }
}

/// Offsets a single surface point along angle `theta`.
pub fn offset_point(p: &Point3, theta: f64, omega: f64) -> Point3 {
    Point3::new(p.x + omega * theta.cos(), p.y + omega * theta.sin(), p.z)
}

/// Yaw that faces the structure from a waypoint at radial angle `theta`.
pub fn facing_yaw(theta: f64) -> f64 {
    normalize_angle(theta + PI)
}

/// Builds the ordered, thinned offset loop for `lp`.
pub fn build_offset_loop(
    lp: &Loop,
    omega: f64,
    waypoint_pitch: f64,
    slice_index: usize,
    loop_id: usize,
) -> Result<OffsetLoop> {
    if lp.points.len() < 3 {
        return Err(Error::DegenerateLoop(lp.points.len()));
    }
    if !(omega.is_finite() && omega > 0.0 && waypoint_pitch.is_finite() && waypoint_pitch > 0.0) {
        return Err(Error::Invalid("omega and waypoint pitch must be positive".into()));
    }
    let center = lp.center;
    let scale = lp
        .points
        .iter()
        .map(|p| (p.x - center.x).hypot(p.y - center.y))
        .fold(0.0, f64::max);

    let mut skipped = 0;
    let mut candidates: Vec<(f64, f64, usize)> = Vec::with_capacity(lp.points.len());
    for (i, p) in lp.points.iter().enumerate() {
        let rho = (p.x - center.x).hypot(p.y - center.y);
        if rho <= 1e-12 * scale.max(1.0) {
            warn!("slice {slice_index} loop {loop_id}: surface point {i} coincides with the loop center");
            skipped += 1;
            continue;
        }
        candidates.push((radial_angle(p, &center), rho, i));
    }

    let bins = ((TAU * (scale + omega) / waypoint_pitch).ceil() as usize).max(3);
    let width = TAU / bins as f64;
    let mut per_bin: Vec<Vec<(f64, f64, usize)>> = vec![Vec::new(); bins];
    for c in candidates {
        let b = (((c.0 + PI) / width) as usize).min(bins - 1);
        per_bin[b].push(c);
    }

    let mut waypoints = Vec::new();
    for (b, cell) in per_bin.iter().enumerate() {
        let Some(outer) = cell.iter().map(|c| c.1).reduce(f64::max) else {
            continue;
        };
        let mid = -PI + (b as f64 + 0.5) * width;
        let &(theta, _, i) = cell
            .iter()
            .filter(|c| c.1 >= outer - OUTERMOST_TOL * omega)
            .min_by(|a, b| {
                (a.0 - mid)
                    .abs()
                    .total_cmp(&(b.0 - mid).abs())
                    .then(a.2.cmp(&b.2))
            })
            .expect("bin has an outermost point");
        let source = lp.points[i];
        waypoints.push(Waypoint {
            position: offset_point(&source, theta, omega),
            yaw: facing_yaw(theta),
            radial_angle: theta,
            source,
            loop_id,
            slice_index,
            flagged: false,
        });
    }
    flag_low_clearance(&mut waypoints, &lp.points, omega);
    Ok(OffsetLoop {
        waypoints,
        center,
        slice_index,
        loop_id,
        skipped,
    })
}

/// Flags waypoints closer than `omega * (1 - CLEARANCE_SLACK)` (planar) to any
/// point of `surface`. Returns the number of newly flagged waypoints.
pub fn flag_low_clearance(waypoints: &mut [Waypoint], surface: &[Point3], omega: f64) -> usize {
    let limit = omega * (1.0 - CLEARANCE_SLACK);
    let mut flagged = 0;
    for w in waypoints.iter_mut() {
        if w.flagged {
            continue;
        }
        if surface.iter().any(|p| planar_distance(&w.position, p) < limit) {
            w.flagged = true;
            flagged += 1;
        }
    }
    flagged
}

/// Writes `offset_<slice>_<loop>.txt` files with `x y z yaw` rows.
pub fn dump_offsets(dir: &Path, loops: &[OffsetLoop]) -> Result<()> {
    for l in loops {
        let mut out = String::new();
        for w in &l.waypoints {
            let _ = writeln!(out, "{} {} {} {}", w.position.x, w.position.y, w.position.z, w.yaw);
        }
        let path = dir.join(format!("offset_{}_{}.txt", l.slice_index, l.loop_id));
        std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
