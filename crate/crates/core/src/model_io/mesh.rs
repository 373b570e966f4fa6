use std::path::Path;

use log::warn;

use super::points::strip_comment;
use super::{ModelSource, StructureModel};
use crate::error::{Error, Result};
use crate::geometry::Point3;

pub type Triangle = [Point3; 3];

/// Loads an ASCII STL or OBJ mesh and densifies it at `sample_pitch`.
pub fn load_mesh(path: &Path, sample_pitch: f64) -> Result<StructureModel> {
    if !(sample_pitch > 0.0 && sample_pitch.is_finite()) {
        return Err(Error::Config(format!("sample_pitch must be > 0, got {sample_pitch}")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    let triangles = match ext.as_deref() {
        Some("obj") => parse_obj(&text, path)?,
        _ => parse_stl(&text, path)?,
    };
    if triangles.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    triangles_to_model(&triangles, sample_pitch)
}

/// Densifies triangles; zero-area faces are skipped and counted.
pub fn triangles_to_model(triangles: &[Triangle], sample_pitch: f64) -> Result<StructureModel> {
    let mut points = Vec::new();
    let mut skipped = 0;
    for (i, tri) in triangles.iter().enumerate() {
        if !sample_triangle(tri, sample_pitch, &mut points) {
            warn!("skipping degenerate face {i}");
            skipped += 1;
        }
    }
    if points.is_empty() {
        return Err(Error::Model("mesh has no non-degenerate faces".into()));
    }
    StructureModel::new(
        points,
        ModelSource::Mesh {
            faces: triangles.len(),
            skipped_degenerate: skipped,
        },
    )
}

/// Appends a barycentric grid over `tri` whose edge spacing is at most
/// `pitch`. Vertices and edges are included. Returns false for a zero-area
/// triangle, which contributes nothing.
pub fn sample_triangle(tri: &Triangle, pitch: f64, out: &mut Vec<Point3>) -> bool {
    let [a, b, c] = tri;
    let ab = b - a;
    let ac = c - a;
    let area2 = ab.cross(&ac).norm();
    let longest = ab.norm().max(ac.norm()).max((c - b).norm());
    if area2 <= 1e-12 * longest * longest || longest == 0.0 {
        return false;
    }
    let n = ((longest / pitch).ceil() as usize).max(1);
    let inv = 1.0 / n as f64;
    for i in 0..=n {
        for j in 0..=(n - i) {
            let u = i as f64 * inv;
            let v = j as f64 * inv;
            out.push(a + ab * u + ac * v);
        }
    }
    true
}

/// Parses ASCII STL (`solid` / `facet normal` / `outer loop` / `vertex` ...).
pub fn parse_stl(text: &str, path: &Path) -> Result<Vec<Triangle>> {
    #[derive(PartialEq)]
    enum State {
        Start,
        Solid,
        Facet,
        Loop(usize),
        EndLoop,
        Done,
    }
    let mut state = State::Start;
    let mut tris = Vec::new();
    let mut current = [Point3::origin(); 3];
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let mut tok = raw.split_whitespace();
        let Some(head) = tok.next() else { continue };
        let err = |m: &str| Error::parse(path, lineno, m.to_string());
        match (&state, head) {
            (State::Start, "solid") => state = State::Solid,
            (State::Solid, "facet") => {
                if tok.next() != Some("normal") {
                    return Err(err("expected 'facet normal'"));
                }
                let n: Vec<&str> = tok.collect();
                if n.len() != 3 || n.iter().any(|s| s.parse::<f64>().is_err()) {
                    return Err(err("malformed facet normal"));
                }
                state = State::Facet;
            }
            (State::Solid, "endsolid") => state = State::Done,
            (State::Facet, "outer") => {
                if tok.next() != Some("loop") {
                    return Err(err("expected 'outer loop'"));
                }
                state = State::Loop(0);
            }
            (State::Loop(k), "vertex") => {
                let k = *k;
                if k >= 3 {
                    return Err(err("facet has more than 3 vertices"));
                }
                current[k] = parse_xyz(tok, path, lineno)?;
                state = State::Loop(k + 1);
            }
            (State::Loop(3), "endloop") => state = State::EndLoop,
            (State::Loop(_), "endloop") => return Err(err("facet has fewer than 3 vertices")),
            (State::EndLoop, "endfacet") => {
                tris.push(current);
                state = State::Solid;
            }
            (State::Done, _) => return Err(err("content after endsolid")),
            (_, other) => return Err(err(&format!("unexpected STL record {other:?}"))),
        }
    }
    match state {
        State::Done => Ok(tris),
        State::Start => Err(Error::EmptyInput(path.to_path_buf())),
        _ => Err(Error::parse(path, text.lines().count(), "unterminated STL solid")),
    }
}

/// Parses OBJ `v` and `f` records. Quads are split into two triangles;
/// larger polygons are rejected.
pub fn parse_obj(text: &str, path: &Path) -> Result<Vec<Triangle>> {
    let mut verts: Vec<Point3> = Vec::new();
    let mut tris = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        let mut tok = line.split_whitespace();
        let Some(head) = tok.next() else { continue };
        match head {
            "v" => {
                let fields: Vec<&str> = tok.collect();
                // Optional homogeneous weight is accepted and ignored.
                if fields.len() != 3 && fields.len() != 4 {
                    return Err(Error::parse(path, lineno, "vertex needs 3 coordinates"));
                }
                verts.push(parse_xyz(fields[..3].iter().copied(), path, lineno)?);
            }
            "f" => {
                let mut ids = Vec::new();
                for t in tok {
                    ids.push(resolve_index(t, verts.len(), path, lineno)?);
                }
                let v = |i: usize| verts[ids[i]];
                match ids.len() {
                    3 => tris.push([v(0), v(1), v(2)]),
                    4 => {
                        tris.push([v(0), v(1), v(2)]);
                        tris.push([v(0), v(2), v(3)]);
                    }
                    n => {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("face with {n} vertices; only triangles and quads are supported"),
                        ))
                    }
                }
            }
            "vn" | "vt" | "vp" | "o" | "g" | "s" | "usemtl" | "mtllib" => {}
            other => return Err(Error::parse(path, lineno, format!("unsupported OBJ record {other:?}"))),
        }
    }
    Ok(tris)
}

fn resolve_index(token: &str, nverts: usize, path: &Path, lineno: usize) -> Result<usize> {
    let first = token.split('/').next().unwrap_or("");
    let raw: i64 = first
        .parse()
        .map_err(|_| Error::parse(path, lineno, format!("invalid face index {token:?}")))?;
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        nverts as i64 + raw
    } else {
        -1
    };
    if idx < 0 || idx as usize >= nverts {
        return Err(Error::parse(path, lineno, format!("face index {raw} out of range")));
    }
    Ok(idx as usize)
}

fn parse_xyz<'a>(tok: impl Iterator<Item = &'a str>, path: &Path, lineno: usize) -> Result<Point3> {
    let vals: Vec<&str> = tok.collect();
    if vals.len() != 3 {
        return Err(Error::parse(path, lineno, "expected 3 coordinates"));
    }
    let mut xyz = [0.0; 3];
    for (slot, s) in xyz.iter_mut().zip(&vals) {
        *slot = s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::parse(path, lineno, format!("invalid coordinate {s:?}")))?;
    }
    Ok(Point3::new(xyz[0], xyz[1], xyz[2]))
}
