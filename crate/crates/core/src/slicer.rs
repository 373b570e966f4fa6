//! Horizontal slicing of the structure point set.
//!
//! Plane heights start one spacing above the lowest point and stop at the
//! last height that is still one spacing below the top. Each plane collects
//! the points in the half-open band `[lambda - d/2, lambda + d/2)` and
//! projects them onto the plane.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::model_io::{write_point_set, StructureModel};

/// Points of the structure on one horizontal plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub index: usize,
    /// Plane height z, m.
    pub lambda: f64,
    pub points: Vec<Point3>,
}

impl Slice {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Absolute slack when comparing the last plane against `max_z - delta_lambda`,
/// so that heights landing on the bound up to rounding are kept.
const HEIGHT_EPS: f64 = 1e-9;

/// Plane heights `min_z + i * delta_lambda`, `i = 1, 2, ...`, up to and
/// including the largest value not above `max_z - delta_lambda`.
pub fn slice_heights(min_z: f64, max_z: f64, delta_lambda: f64) -> Result<Vec<f64>> {
    let extent = max_z - min_z;
    if !(delta_lambda > 0.0 && delta_lambda.is_finite()) {
        return Err(Error::Invalid(format!("slice spacing must be > 0, got {delta_lambda}")));
    }
    if delta_lambda >= extent {
        return Err(Error::NoSlices { delta_lambda, extent });
    }
    let top = max_z - delta_lambda;
    let mut heights = Vec::new();
    let mut i = 1usize;
    loop {
        let lambda = min_z + i as f64 * delta_lambda;
        if lambda > top + HEIGHT_EPS {
            break;
        }
        heights.push(lambda);
        i += 1;
    }
    if heights.is_empty() {
        return Err(Error::NoSlices { delta_lambda, extent });
    }
    Ok(heights)
}

/// Slices `model` with planes spaced `delta_lambda` apart.
///
/// Empty slices are kept so that slice indices stay aligned with heights.
pub fn slice_model(model: &StructureModel, delta_lambda: f64) -> Result<Vec<Slice>> {
    let b = model.bounds();
    let heights = slice_heights(b.min.z, b.max.z, delta_lambda)?;
    let half = 0.5 * delta_lambda;
    let mut slices: Vec<Slice> = heights
        .iter()
        .enumerate()
        .map(|(index, &lambda)| Slice {
            index,
            lambda,
            points: Vec::new(),
        })
        .collect();

    let first = heights[0];
    for p in model.points() {
        // Candidate band from the nearest plane, then confirm against the
        // exact half-open interval to stay robust to rounding in the division.
        let approx = ((p.z - first) / delta_lambda).round();
        if approx < -1.0 || approx > heights.len() as f64 {
            continue;
        }
        let guess = approx as i64;
        for i in (guess - 1).max(0)..=(guess + 1).min(heights.len() as i64 - 1) {
            let lambda = heights[i as usize];
            if p.z >= lambda - half && p.z < lambda + half {
                slices[i as usize].points.push(Point3::new(p.x, p.y, lambda));
                break;
            }
        }
    }
    Ok(slices)
}

/// Writes one `slice_<index>_<lambda>.txt` point-set file per slice.
pub fn dump_slices(dir: &Path, slices: &[Slice]) -> Result<()> {
    for s in slices {
        let path = dir.join(format!("slice_{}_{:.4}.txt", s.index, s.lambda));
        write_point_set(&path, &s.points)?;
    }
    Ok(())
}
