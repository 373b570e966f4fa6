//! Waypoint to trajectory conversion.
//!
//! Each stretch of motion between hovers is sampled every `h = t_s * v_d`
//! metres of arc length, with a shorter final step onto its end point.
//! Velocities are parallel to the current leg with norm `v_d`; yaw is
//! interpolated along the shorter arc in proportion to arc length.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, shortest_arc, Point3, Vector3};

use super::{AgentPlan, Segment};

/// Relative tolerance when deciding whether a leg is an exact multiple of `h`.
const STEP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub position: Point3,
    pub velocity: Vector3,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self, t_s: f64) -> f64 {
        self.samples.len().saturating_sub(1) as f64 * t_s
    }
}

/// A path vertex with its yaw, or a hover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Node {
    Point(Point3, f64),
    Hold(Point3, f64, usize),
}

/// Number of trajectory steps needed to traverse a leg of length `len`.
pub fn leg_steps(len: f64, h: f64) -> usize {
    if len <= 0.0 {
        return 0;
    }
    let q = len / h;
    let r = q.round();
    if (q - r).abs() <= STEP_EPS * q.max(1.0) {
        r as usize
    } else {
        q.ceil() as usize
    }
}

/// Length of the polyline through `points`.
pub fn polyline_length(points: &[Point3]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Flattens a plan into path nodes, interpolating yaw along transfers.
pub(crate) fn plan_nodes(plan: &AgentPlan) -> Vec<Node> {
    let mut nodes = Vec::new();
    for seg in &plan.segments {
        match seg {
            Segment::Coverage(wps) => {
                nodes.extend(wps.iter().map(|w| Node::Point(w.position, w.yaw)));
            }
            Segment::Transfer {
                points,
                yaw_from,
                yaw_to,
            } => {
                let total: f64 = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
                let sweep = shortest_arc(*yaw_from, *yaw_to);
                let mut acc = 0.0;
                for (i, p) in points.iter().enumerate() {
                    if i > 0 {
                        acc += (points[i] - points[i - 1]).norm();
                    }
                    let f = if total > 0.0 { acc / total } else { 1.0 };
                    nodes.push(Node::Point(*p, normalize_angle(yaw_from + f * sweep)));
                }
            }
            Segment::Hold { position, yaw, steps } => nodes.push(Node::Hold(*position, *yaw, *steps)),
        }
    }
    nodes
}

/// Converts a plan into a time-sampled trajectory.
pub fn generate_trajectory(plan: &AgentPlan, v_d: f64, t_s: f64) -> Trajectory {
    trajectory_from_nodes(&plan_nodes(plan), v_d, t_s)
}

pub(crate) fn trajectory_from_nodes(nodes: &[Node], v_d: f64, t_s: f64) -> Trajectory {
    let h = v_d * t_s;
    // (position, yaw, velocity direction of the motion leaving this sample or None)
    let mut raw: Vec<(Point3, f64, Option<Vector3>)> = Vec::new();
    let mut cur: Option<(Point3, f64)> = None;
    let mut run: Vec<(Point3, f64)> = Vec::new();
    for node in nodes {
        match *node {
            Node::Point(p, yaw) => {
                if cur.is_none() {
                    raw.push((p, yaw, None));
                    cur = Some((p, yaw));
                }
                if run.is_empty() {
                    run.push(cur.expect("set above"));
                }
                run.push((p, yaw));
                cur = Some((p, yaw));
            }
            Node::Hold(p, yaw, steps) => {
                sample_run(&run, h, &mut raw);
                run.clear();
                if cur.is_none() {
                    raw.push((p, yaw, None));
                    cur = Some((p, yaw));
                }
                let (at, y) = cur.expect("hold follows a position");
                for _ in 0..steps {
                    raw.push((at, y, None));
                }
            }
        }
    }
    sample_run(&run, h, &mut raw);
    let samples = raw
        .into_iter()
        .enumerate()
        .map(|(i, (position, yaw, dir))| Sample {
            t: i as f64 * t_s,
            position,
            velocity: dir.map_or_else(Vector3::zeros, |d| d * v_d),
            yaw,
        })
        .collect();
    Trajectory { samples }
}

/// Samples the polyline `run` every `h` of arc length, ending on its last
/// vertex. The first vertex is already in `raw`.
fn sample_run(run: &[(Point3, f64)], h: f64, raw: &mut Vec<(Point3, f64, Option<Vector3>)>) {
    // (start, direction, length, cumulative start, yaw at start, yaw sweep)
    let mut legs: Vec<(Point3, Vector3, f64, f64, f64, f64)> = Vec::new();
    let mut total = 0.0;
    for w in run.windows(2) {
        let len = (w[1].0 - w[0].0).norm();
        if len == 0.0 {
            // Zero-length leg: skipped, but the new yaw applies from here on.
            if legs.is_empty() {
                if let Some(last) = raw.last_mut() {
                    last.1 = w[1].1;
                }
            }
            continue;
        }
        let yaw_start = if legs.is_empty() { raw.last().map_or(w[0].1, |r| r.1) } else { w[0].1 };
        legs.push((w[0].0, (w[1].0 - w[0].0) / len, len, total, yaw_start, shortest_arc(yaw_start, w[1].1)));
        total += len;
    }
    let Some(first) = legs.first() else {
        return;
    };
    if let Some(last) = raw.last_mut() {
        last.2 = Some(first.1);
    }
    let (end, end_yaw) = *run.last().expect("non-empty run");
    let k = leg_steps(total, h);
    let mut i = 0;
    for j in 1..k {
        let s = j as f64 * h;
        while i + 1 < legs.len() && s >= legs[i + 1].3 {
            i += 1;
        }
        let (a, dir, len, start, yaw_a, sweep) = legs[i];
        let u = s - start;
        raw.push((a + dir * u, normalize_angle(yaw_a + sweep * (u / len).min(1.0)), Some(dir)));
    }
    raw.push((end, end_yaw, None));
}

/// Per-agent durations and the overall mission duration, seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionDuration {
    pub per_agent: Vec<f64>,
    pub max: f64,
}

pub fn mission_duration(trajectories: &[Trajectory], t_s: f64) -> Result<MissionDuration> {
    if trajectories.is_empty() {
        return Err(Error::Invalid("no trajectories".into()));
    }
    let per_agent: Vec<f64> = trajectories.iter().map(|t| t.duration(t_s)).collect();
    let max = per_agent.iter().copied().fold(0.0, f64::max);
    Ok(MissionDuration { per_agent, max })
}

pub const CSV_HEADER: &str = "t,x,y,z,vx,vy,vz,yaw";

/// Formats `v` with 9 significant digits, like C's `%.9g`.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.8e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mant.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

pub fn format_trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (traj.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_sig9(s.t),
            fmt_sig9(s.position.x),
            fmt_sig9(s.position.y),
            fmt_sig9(s.position.z),
            fmt_sig9(s.velocity.x),
            fmt_sig9(s.velocity.y),
            fmt_sig9(s.velocity.z),
            fmt_sig9(s.yaw)
        );
    }
    out
}

pub fn parse_trajectory_csv(text: &str, path: &Path) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::parse(path, 1, format!("expected header {CSV_HEADER:?}"))),
    }
    let mut samples = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .filter(|v| v.len() == 8)
            .ok_or_else(|| Error::parse(path, idx + 1, "expected 8 numeric fields"))?;
        samples.push(Sample {
            t: vals[0],
            position: Point3::new(vals[1], vals[2], vals[3]),
            velocity: Vector3::new(vals[4], vals[5], vals[6]),
            yaw: vals[7],
        });
    }
    Ok(Trajectory { samples })
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    std::fs::write(path, format_trajectory_csv(traj)).map_err(|e| Error::io(path, e))
}

pub fn load_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory_csv(&text, path)
}
