//! Multi-agent mission construction: assignment, deconfliction, transfers
//! and trajectory generation.

pub mod assign;
pub mod plan;
pub mod schedule;
pub mod trajectory;
pub mod transfer;

use crate::geometry::Point3;
use crate::offset::Waypoint;

pub use assign::{assign_agents, assign_slice, BranchPolicy, SliceAssignment, Task};
pub use plan::{plan_mission, MissionPlan};
pub use schedule::{check_lockstep, schedule_deconflicted, Candidates};
pub use trajectory::{
    format_trajectory_csv, generate_trajectory, load_trajectory_csv, mission_duration, parse_trajectory_csv,
    write_trajectory_csv, MissionDuration, Sample, Trajectory, CSV_HEADER,
};
pub use transfer::{build_transfer, Obstacle, MAX_PUSH_ITERATIONS, PUSH_FRACTION};

/// One piece of an agent's flight.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    /// Inspection waypoints flown in order.
    Coverage(Vec<Waypoint>),
    /// Repositioning path; yaw turns from `yaw_from` to `yaw_to` along it.
    Transfer {
        points: Vec<Point3>,
        yaw_from: f64,
        yaw_to: f64,
    },
    /// Hover for `steps` sampling periods.
    Hold { position: Point3, yaw: f64, steps: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentPlan {
    pub agent_id: usize,
    pub segments: Vec<Segment>,
    /// Length of the flown polyline, m.
    pub total_path_length: f64,
}

impl AgentPlan {
    pub fn new(agent_id: usize) -> Self {
        AgentPlan {
            agent_id,
            segments: Vec::new(),
            total_path_length: 0.0,
        }
    }

    /// All coverage waypoints in flight order.
    pub fn coverage_waypoints(&self) -> impl Iterator<Item = &Waypoint> {
        self.segments.iter().flat_map(|s| match s {
            Segment::Coverage(w) => w.as_slice(),
            _ => &[],
        })
    }

    pub fn waypoint_count(&self) -> usize {
        self.coverage_waypoints().count()
    }

    /// Recomputes `total_path_length` from the segments.
    pub fn update_length(&mut self) {
        let mut last: Option<Point3> = None;
        let mut total = 0.0;
        let mut visit = |p: Point3| {
            if let Some(q) = last {
                total += (p - q).norm();
            }
            last = Some(p);
        };
        for s in &self.segments {
            match s {
                Segment::Coverage(w) => w.iter().for_each(|w| visit(w.position)),
                Segment::Transfer { points, .. } => points.iter().copied().for_each(&mut visit),
                Segment::Hold { position, .. } => visit(*position),
            }
        }
        self.total_path_length = total;
    }
}
