//! Analytic test structures sampled on their surfaces.
//!
//! Every generator places points exactly on the declared surfaces: ring
//! points on cylinders, grid points on planar faces and discs. The seed only
//! rotates the angular phase of each ring, so two specs that differ only in
//! seed describe the same solid.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point3, Vector3};
use crate::model_io::{ModelSource, StructureModel};

/// Dimensions of the synthetic wind turbine.
///
/// The tower is a vertical cylinder from `z = 0`, capped by a wider hub
/// cylinder. Three blades of radius `blade_radius` leave the hub top at
/// azimuths 90°, 210° and 330°, each rooted `blade_root_offset` from the
/// tower axis and rising outward at `blade_elevation` (radians) above the
/// horizontal, so that every horizontal slice above the hub cuts three
/// separate blade sections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbineDims {
    pub tower_radius: f64,
    pub tower_height: f64,
    pub hub_radius: f64,
    pub hub_height: f64,
    pub blade_radius: f64,
    pub blade_length: f64,
    pub blade_root_offset: f64,
    pub blade_elevation: f64,
}

impl Default for TurbineDims {
    fn default() -> Self {
        TurbineDims {
            tower_radius: 1.0,
            tower_height: 10.2,
            hub_radius: 2.6,
            hub_height: 1.0,
            blade_radius: 0.3,
            blade_length: 8.0,
            blade_root_offset: 2.2,
            blade_elevation: 60f64.to_radians(),
        }
    }
}

impl TurbineDims {
    /// Height of the hub top, where the blades start.
    pub fn hub_top(&self) -> f64 {
        self.tower_height + self.hub_height
    }

    pub const BLADE_AZIMUTHS_DEG: [f64; 3] = [90.0, 210.0, 330.0];

    /// Unit axis of blade `i`.
    pub fn blade_axis(&self, i: usize) -> Vector3 {
        let phi = Self::BLADE_AZIMUTHS_DEG[i].to_radians();
        let e = self.blade_elevation;
        Vector3::new(e.cos() * phi.cos(), e.cos() * phi.sin(), e.sin())
    }

    /// Root point (on the hub top) of blade `i`.
    pub fn blade_root(&self, i: usize) -> Point3 {
        let phi = Self::BLADE_AZIMUTHS_DEG[i].to_radians();
        Point3::new(
            self.blade_root_offset * phi.cos(),
            self.blade_root_offset * phi.sin(),
            self.hub_top(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fixture {
    /// Lateral surface of a vertical cylinder on the origin, `z` in `[0, height]`.
    Cylinder { radius: f64, height: f64 },
    /// Two vertical cylinders centered at `x = ±spacing / 2`.
    Pillars { radius: f64, height: f64, spacing: f64 },
    /// A single column of `count` identical boxes centered on the z axis.
    Boxes { length: f64, width: f64, height: f64, count: usize },
    Turbine(TurbineDims),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureSpec {
    pub shape: Fixture,
    pub sample_pitch: f64,
    pub seed: u64,
}

impl FixtureSpec {
    pub fn cylinder(radius: f64, height: f64, sample_pitch: f64) -> Self {
        FixtureSpec {
            shape: Fixture::Cylinder { radius, height },
            sample_pitch,
            seed: 0,
        }
    }

    pub fn pillars() -> Self {
        FixtureSpec {
            shape: Fixture::Pillars {
                radius: 1.0,
                height: 6.0,
                spacing: 10.0,
            },
            sample_pitch: 0.1,
            seed: 0,
        }
    }

    /// Six 0.57 × 0.40 × 0.30 m boxes stacked into a 1.8 m column.
    pub fn boxes() -> Self {
        FixtureSpec {
            shape: Fixture::Boxes {
                length: 0.57,
                width: 0.40,
                height: 0.30,
                count: 6,
            },
            sample_pitch: 0.02,
            seed: 0,
        }
    }

    pub fn turbine() -> Self {
        FixtureSpec {
            shape: Fixture::Turbine(TurbineDims::default()),
            sample_pitch: 0.1,
            seed: 0,
        }
    }

    /// Looks up a default spec by name: `cylinder`, `pillars`, `boxes` or `turbine`.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "cylinder" => Some(Self::cylinder(2.8, 10.1, 0.1)),
            "pillars" => Some(Self::pillars()),
            "boxes" => Some(Self::boxes()),
            "turbine" => Some(Self::turbine()),
            _ => None,
        }
    }
}

fn require_positive(pairs: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in pairs {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Invalid(format!("fixture dimension {name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Samples the fixture's surface at roughly `sample_pitch` spacing.
pub fn generate(spec: &FixtureSpec) -> Result<StructureModel> {
    require_positive(&[("sample_pitch", spec.sample_pitch)])?;
    let pitch = spec.sample_pitch;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pts = Vec::new();
    match spec.shape {
        Fixture::Cylinder { radius, height } => {
            require_positive(&[("radius", radius), ("height", height)])?;
            vertical_cylinder(&mut pts, 0.0, 0.0, radius, 0.0, height, pitch, &mut rng);
        }
        Fixture::Pillars { radius, height, spacing } => {
            require_positive(&[("radius", radius), ("height", height), ("spacing", spacing)])?;
            if spacing <= 2.0 * radius {
                return Err(Error::Invalid("pillars overlap: spacing must exceed twice the radius".into()));
            }
            for cx in [-0.5 * spacing, 0.5 * spacing] {
                vertical_cylinder(&mut pts, cx, 0.0, radius, 0.0, height, pitch, &mut rng);
            }
        }
        Fixture::Boxes { length, width, height, count } => {
            require_positive(&[("length", length), ("width", width), ("height", height), ("count", count as f64)])?;
            let (hx, hy, top) = (0.5 * length, 0.5 * width, height * count as f64);
            let zs = grid_1d(0.0, top, pitch);
            let xs = grid_1d(-hx, hx, pitch);
            let ys = grid_1d(-hy, hy, pitch);
            for &z in &zs {
                for &x in &xs {
                    pts.push(Point3::new(x, -hy, z));
                    pts.push(Point3::new(x, hy, z));
                }
                for &y in &ys[1..ys.len() - 1] {
                    pts.push(Point3::new(-hx, y, z));
                    pts.push(Point3::new(hx, y, z));
                }
            }
            for z in [0.0, top] {
                for &x in &xs[1..xs.len() - 1] {
                    for &y in &ys[1..ys.len() - 1] {
                        pts.push(Point3::new(x, y, z));
                    }
                }
            }
        }
        Fixture::Turbine(d) => {
            require_positive(&[
                ("tower_radius", d.tower_radius),
                ("tower_height", d.tower_height),
                ("hub_radius", d.hub_radius),
                ("hub_height", d.hub_height),
                ("blade_radius", d.blade_radius),
                ("blade_length", d.blade_length),
                ("blade_root_offset", d.blade_root_offset),
                ("blade_elevation", d.blade_elevation),
            ])?;
            if d.blade_elevation >= TAU / 4.0 {
                return Err(Error::Invalid("blade elevation must be below 90 degrees".into()));
            }
            vertical_cylinder(&mut pts, 0.0, 0.0, d.tower_radius, 0.0, d.tower_height, pitch, &mut rng);
            vertical_cylinder(&mut pts, 0.0, 0.0, d.hub_radius, d.tower_height, d.hub_top(), pitch, &mut rng);
            disc(&mut pts, Point3::new(0.0, 0.0, d.tower_height), Vector3::z(), d.hub_radius, pitch, &mut rng);
            disc(&mut pts, Point3::new(0.0, 0.0, d.hub_top()), Vector3::z(), d.hub_radius, pitch, &mut rng);
            for i in 0..3 {
                let axis = d.blade_axis(i);
                let root = d.blade_root(i);
                tube(&mut pts, root, axis, d.blade_radius, d.blade_length, pitch, &mut rng);
                disc(&mut pts, root + axis * d.blade_length, axis, d.blade_radius, pitch, &mut rng);
            }
        }
    }
    StructureModel::new(pts, ModelSource::PointSet)
}

/// `n + 1` evenly spaced values covering `[a, b]` with spacing at most `pitch`.
fn grid_1d(a: f64, b: f64, pitch: f64) -> Vec<f64> {
    let n = (((b - a) / pitch).ceil() as usize).max(1);
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}

fn ring_count(radius: f64, pitch: f64) -> usize {
    ((TAU * radius / pitch).ceil() as usize).max(3)
}

#[allow(clippy::too_many_arguments)]
fn vertical_cylinder(
    out: &mut Vec<Point3>,
    cx: f64,
    cy: f64,
    radius: f64,
    z0: f64,
    z1: f64,
    pitch: f64,
    rng: &mut ChaCha8Rng,
) {
    let n = ring_count(radius, pitch);
    for z in grid_1d(z0, z1, pitch) {
        let phase: f64 = rng.gen::<f64>() * TAU / n as f64;
        for i in 0..n {
            let a = phase + i as f64 * TAU / n as f64;
            out.push(Point3::new(cx + radius * a.cos(), cy + radius * a.sin(), z));
        }
    }
}

/// Unit vectors completing `axis` to an orthonormal frame.
fn frame(axis: Vector3) -> (Vector3, Vector3) {
    let helper = if axis.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let v = axis.cross(&helper).normalize();
    let w = axis.cross(&v).normalize();
    (v, w)
}

/// Lateral surface of a cylinder from `base` along unit `axis`.
fn tube(out: &mut Vec<Point3>, base: Point3, axis: Vector3, radius: f64, length: f64, pitch: f64, rng: &mut ChaCha8Rng) {
    let (v, w) = frame(axis);
    let n = ring_count(radius, pitch);
    for s in grid_1d(0.0, length, pitch) {
        let c = base + axis * s;
        let phase: f64 = rng.gen::<f64>() * TAU / n as f64;
        for i in 0..n {
            let a = phase + i as f64 * TAU / n as f64;
            out.push(c + (v * a.cos() + w * a.sin()) * radius);
        }
    }
}

/// Filled disc of concentric rings about `center`, normal to `axis`.
fn disc(out: &mut Vec<Point3>, center: Point3, axis: Vector3, radius: f64, pitch: f64, rng: &mut ChaCha8Rng) {
    let (v, w) = frame(axis);
    out.push(center);
    for r in grid_1d(0.0, radius, pitch).into_iter().skip(1) {
        let n = ring_count(r, pitch);
        let phase: f64 = rng.gen::<f64>() * TAU / n as f64;
        for i in 0..n {
            let a = phase + i as f64 * TAU / n as f64;
            out.push(center + (v * a.cos() + w * a.sin()) * r);
        }
    }
}
