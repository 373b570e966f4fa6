//! Loading structure models and planner configuration.
//!
//! A structure is always represented as a dense point set. Meshes are
//! densified on load so the slicer has a single code path.

mod config;
mod mesh;
mod points;

pub use config::{load_config, parse_config, PlannerConfig};
pub use mesh::{load_mesh, parse_obj, parse_stl, sample_triangle, triangles_to_model, Triangle};
pub use points::{format_point_set, load_point_set, parse_point_set, write_point_set};

use crate::error::{Error, Result};
use crate::geometry::{Bounds, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSource {
    PointSet,
    Mesh {
        faces: usize,
        /// Zero-area faces dropped during densification.
        skipped_degenerate: usize,
    },
}

/// Dense surface sample of the structure under inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureModel {
    points: Vec<Point3>,
    bounds: Bounds,
    source: ModelSource,
}

impl StructureModel {
    /// Builds a model, checking that the point set is non-empty and finite.
    ///
    /// Vertical extent is not required here; the slicer reports flat models.
    pub fn new(points: Vec<Point3>, source: ModelSource) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Model(format!("point {i} has a non-finite coordinate")));
        }
        let bounds = Bounds::from_points(&points).ok_or_else(|| Error::Model("model has no points".into()))?;
        Ok(StructureModel {
            points,
            bounds,
            source,
        })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn source(&self) -> ModelSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn vertical_extent(&self) -> f64 {
        self.bounds.max.z - self.bounds.min.z
    }
}

/// Loads a model, choosing the parser by file extension (`.stl`, `.obj`,
/// anything else is read as a point set).
pub fn load_model(path: &std::path::Path, sample_pitch: f64) -> Result<StructureModel> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("stl") | Some("obj") => load_mesh(path, sample_pitch),
        _ => load_point_set(path),
    }
}
