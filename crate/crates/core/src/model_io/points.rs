use std::fmt::Write as _;
use std::path::Path;

use super::{ModelSource, StructureModel};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Reads an ASCII point set: one `x y z` (or `x,y,z`) triple per line,
/// `#` starts a comment.
pub fn load_point_set(path: &Path) -> Result<StructureModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_point_set(&text, path)
}

pub fn parse_point_set(text: &str, path: &Path) -> Result<StructureModel> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, idx + 1, format!("expected 3 coordinates, found {}", fields.len())));
        }
        let mut xyz = [0.0; 3];
        for (slot, field) in xyz.iter_mut().zip(&fields) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, format!("invalid number {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(path, idx + 1, format!("non-finite coordinate {field:?}")));
            }
            *slot = v;
        }
        points.push(Point3::new(xyz[0], xyz[1], xyz[2]));
    }
    if points.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    StructureModel::new(points, ModelSource::PointSet)
}

/// Formats points so that reloading reproduces them bit-exactly.
pub fn format_point_set(points: &[Point3]) -> String {
    let mut out = String::with_capacity(points.len() * 32);
    for p in points {
        // `Display` for f64 emits the shortest round-tripping representation.
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    out
}

pub fn write_point_set(path: &Path, points: &[Point3]) -> Result<()> {
    std::fs::write(path, format_point_set(points)).map_err(|e| Error::io(path, e))
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}
