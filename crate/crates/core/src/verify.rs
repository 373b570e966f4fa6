//! Post-hoc checks on sampled trajectories: inter-agent separation,
//! structure clearance and camera coverage of the model surface.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{planar_distance, Point3, PointGrid, Vector3};
use crate::mission::trajectory::fmt_sig9;
use crate::mission::Trajectory;
use crate::model_io::{PlannerConfig, StructureModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    /// Two agents closer than `d_s` in the plane while at similar height.
    Separation { agents: (usize, usize), distance: f64 },
    /// An agent closer than the threshold to the structure.
    Clearance { agent: usize, distance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::Separation { agents, distance } => {
                write!(f, "t={} separation agents {} {} distance {}", self.t, agents.0, agents.1, distance)
            }
            ViolationKind::Clearance { agent, distance } => {
                write!(f, "t={} clearance agent {} distance {}", self.t, agent, distance)
            }
        }
    }
}

/// Result of a separation or clearance scan.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyCheck {
    /// `f64::INFINITY` when nothing was compared.
    pub min_distance: f64,
    pub violations: Vec<Violation>,
}

/// Pairwise planar separation at every common sample index.
///
/// Two agents are compared only while their altitudes differ by less than
/// `d_s`; agents on different levels cannot meet in the plane.
pub fn check_safety(trajectories: &[Trajectory], d_s: f64) -> SafetyCheck {
    let common = trajectories.iter().map(Trajectory::len).min().unwrap_or(0);
    let mut min_distance = f64::INFINITY;
    let mut violations = Vec::new();
    for k in 0..common {
        for a in 0..trajectories.len() {
            for b in a + 1..trajectories.len() {
                let (sa, sb) = (&trajectories[a].samples[k], &trajectories[b].samples[k]);
                if (sa.position.z - sb.position.z).abs() >= d_s {
                    continue;
                }
                let d = planar_distance(&sa.position, &sb.position);
                min_distance = min_distance.min(d);
                if d < d_s {
                    violations.push(Violation {
                        t: sa.t,
                        kind: ViolationKind::Separation { agents: (a, b), distance: d },
                    });
                }
            }
        }
    }
    SafetyCheck { min_distance, violations }
}

/// Distance from every sample to the nearest structure point.
pub fn check_clearance(structure: &PointGrid, trajectories: &[Trajectory], threshold: f64) -> SafetyCheck {
    let mut min_distance = f64::INFINITY;
    let mut violations = Vec::new();
    for (agent, traj) in trajectories.iter().enumerate() {
        for s in &traj.samples {
            let Some(d) = structure.nearest_distance(&s.position) else {
                continue;
            };
            min_distance = min_distance.min(d);
            if d < threshold {
                violations.push(Violation {
                    t: s.t,
                    kind: ViolationKind::Clearance { agent, distance: d },
                });
            }
        }
    }
    SafetyCheck { min_distance, violations }
}

/// Cone field of view about the camera axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    /// Full aperture angle, radians.
    pub alpha: f64,
    pub r_max: f64,
    /// Downward pitch of the camera axis below the horizontal, radians.
    pub tilt: f64,
    /// Model points within this distance of a line of sight block it.
    pub occlusion_radius: f64,
}

impl Camera {
    pub fn from_config(cfg: &PlannerConfig) -> Self {
        Camera {
            alpha: cfg.alpha,
            r_max: cfg.r_max,
            tilt: 0.0,
            occlusion_radius: cfg.sample_pitch,
        }
    }

    pub fn axis(&self, yaw: f64) -> Vector3 {
        Vector3::new(yaw.cos() * self.tilt.cos(), yaw.sin() * self.tilt.cos(), -self.tilt.sin())
    }

    /// Range and aperture test, ignoring occlusion.
    pub fn in_cone(&self, eye: &Point3, yaw: f64, target: &Point3) -> bool {
        let d = target - eye;
        let r = d.norm();
        if r > self.r_max {
            return false;
        }
        if r == 0.0 {
            return true;
        }
        d.dot(&self.axis(yaw)) >= r * (0.5 * self.alpha).cos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub covered_fraction: f64,
    pub uncovered_points: Vec<Point3>,
}

/// Marks each model point covered if some sample sees it inside the cone
/// with no other model point near the line of sight.
pub fn check_coverage(model: &StructureModel, trajectories: &[Trajectory], camera: &Camera) -> Coverage {
    let points = model.points();
    let eyes: Vec<(Point3, f64)> = trajectories
        .iter()
        .flat_map(|t| t.samples.iter().map(|s| (s.position, s.yaw)))
        .collect();
    if eyes.is_empty() {
        return Coverage {
            covered_fraction: 0.0,
            uncovered_points: points.to_vec(),
        };
    }
    let eye_positions: Vec<Point3> = eyes.iter().map(|e| e.0).collect();
    let eye_grid = PointGrid::new(&eye_positions, camera.r_max.max(1e-6));
    let occ = camera.occlusion_radius;
    let occluders = PointGrid::new(points, (2.0 * occ).max(1e-6));
    let mut uncovered = Vec::new();
    for p in points {
        let seen = eye_grid.within(p, camera.r_max).into_iter().any(|i| {
            let (eye, yaw) = eyes[i];
            camera.in_cone(&eye, yaw, p) && (occ <= 0.0 || !occluders.blocks_segment(&eye, p, occ, 2.0 * occ))
        });
        if !seen {
            uncovered.push(*p);
        }
    }
    let covered_fraction = if points.is_empty() {
        0.0
    } else {
        1.0 - uncovered.len() as f64 / points.len() as f64
    };
    Coverage {
        covered_fraction,
        uncovered_points: uncovered,
    }
}

/// Combined verification outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub covered_fraction: f64,
    pub uncovered_points: Vec<Point3>,
    pub min_inter_agent_distance: f64,
    pub min_structure_clearance: f64,
    pub per_agent_duration: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl CoverageReport {
    pub fn is_safe(&self) -> bool {
        self.violations.is_empty()
    }

    /// Fixed-key text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "covered_fraction = {}", self.covered_fraction);
        let _ = writeln!(out, "uncovered_points = {}", self.uncovered_points.len());
        let _ = writeln!(out, "min_inter_agent_distance = {}", self.min_inter_agent_distance);
        let _ = writeln!(out, "min_structure_clearance = {}", self.min_structure_clearance);
        for (i, d) in self.per_agent_duration.iter().enumerate() {
            let _ = writeln!(out, "duration_s.{i} = {d}");
        }
        let _ = writeln!(out, "violations = {}", self.violations.len());
        for v in &self.violations {
            let _ = writeln!(out, "violation: {v}");
        }
        out
    }
}

/// Runs every check with the thresholds from `cfg` (clearance threshold `d_s`).
pub fn verify_mission(model: &StructureModel, trajectories: &[Trajectory], cfg: &PlannerConfig) -> CoverageReport {
    let safety = check_safety(trajectories, cfg.d_s);
    let grid = PointGrid::new(model.points(), cfg.d_s.max(cfg.sample_pitch));
    let clearance = check_clearance(&grid, trajectories, cfg.d_s);
    let coverage = check_coverage(model, trajectories, &Camera::from_config(cfg));
    let mut violations = safety.violations;
    violations.extend(clearance.violations);
    violations.sort_by(|a, b| a.t.total_cmp(&b.t));
    CoverageReport {
        covered_fraction: coverage.covered_fraction,
        uncovered_points: coverage.uncovered_points,
        min_inter_agent_distance: safety.min_distance,
        min_structure_clearance: clearance.min_distance,
        per_agent_duration: trajectories.iter().map(|t| t.duration(cfg.t_s)).collect(),
        violations,
    }
}

/// Writes `path_<i>.txt` (`x y z`), `yaw_<i>.txt` (`t value`) per agent and
/// `uncovered.txt` (`x y z`). Returns the written paths.
pub fn export_plot_data(dir: &Path, report: &CoverageReport, trajectories: &[Trajectory]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut write = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for (i, t) in trajectories.iter().enumerate() {
        let mut path = String::from("# x y z\n");
        let mut yaw = String::from("# t value\n");
        for s in &t.samples {
            let p = s.position;
            let _ = writeln!(path, "{} {} {}", fmt_sig9(p.x), fmt_sig9(p.y), fmt_sig9(p.z));
            let _ = writeln!(yaw, "{} {}", fmt_sig9(s.t), fmt_sig9(s.yaw));
        }
        write(format!("path_{i}.txt"), path)?;
        write(format!("yaw_{i}.txt"), yaw)?;
    }
    let mut unc = String::from("# x y z\n");
    for p in &report.uncovered_points {
        let _ = writeln!(unc, "{} {} {}", fmt_sig9(p.x), fmt_sig9(p.y), fmt_sig9(p.z));
    }
    write("uncovered.txt".into(), unc)?;
    Ok(written)
}

/// Number of sign changes of the yaw rate, a measure of how often the
/// heading reverses direction.
pub fn yaw_reversals(traj: &Trajectory) -> usize {
    let rates: Vec<f64> = traj
        .samples
        .windows(2)
        .map(|w| crate::geometry::shortest_arc(w[0].yaw, w[1].yaw))
        .filter(|r| r.abs() > 1e-9)
        .collect();
    rates.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}
