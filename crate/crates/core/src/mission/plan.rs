//! Stage-by-stage mission assembly.
//!
//! Slices are flown bottom-up, one stage per non-empty slice. A stage has a
//! transfer phase (every agent moves to the start of its first task) and a
//! coverage phase; after each phase agents that finished early hover so the
//! whole fleet enters the next phase on the same sampling step.

use log::debug;

use crate::error::Result;
use crate::geometry::{planar_distance, Point3, PointGrid};
use crate::model_io::PlannerConfig;
use crate::offset::{OffsetLoop, Waypoint};

use super::assign::{assign_slice, BranchPolicy, Task};
use super::schedule::{check_lockstep, schedule_deconflicted, Candidates};
use super::trajectory::{leg_steps, polyline_length};
use super::transfer::{build_transfer, Obstacle};
use super::{AgentPlan, Segment};

/// Consecutive coverage waypoints farther apart than this many steps are
/// joined by a repaired transfer instead of a straight coverage leg.
pub const GAP_STEPS: f64 = 2.5;

#[derive(Debug, Clone, PartialEq)]
pub struct MissionPlan {
    pub agents: Vec<AgentPlan>,
    /// Waypoints left out because they were too close to the structure.
    pub flagged: Vec<Waypoint>,
    /// Number of synchronized stages (non-empty slices).
    pub stages: usize,
}

struct AgentState {
    plan: AgentPlan,
    position: Option<Point3>,
    yaw: f64,
    steps: usize,
    /// Step count when the current stretch of motion began.
    run_base: usize,
    /// Arc length flown since then; motion is sampled continuously until a hover.
    run_length: f64,
}

impl AgentState {
    fn new(agent_id: usize) -> Self {
        AgentState {
            plan: AgentPlan::new(agent_id),
            position: None,
            yaw: 0.0,
            steps: 0,
            run_base: 0,
            run_length: 0.0,
        }
    }

    fn push(&mut self, seg: Segment, h: f64) {
        match &seg {
            Segment::Coverage(w) => {
                let pts: Vec<Point3> = self.position.into_iter().chain(w.iter().map(|w| w.position)).collect();
                if let Some(last) = w.last() {
                    self.position = Some(last.position);
                    self.yaw = last.yaw;
                }
                self.advance(polyline_length(&pts), h);
            }
            Segment::Transfer { points, yaw_to, .. } => {
                let pts: Vec<Point3> = self.position.into_iter().chain(points.iter().copied()).collect();
                self.position = points.last().copied().or(self.position);
                self.yaw = *yaw_to;
                self.advance(polyline_length(&pts), h);
            }
            Segment::Hold { steps, .. } => {
                self.steps += steps;
                self.run_base = self.steps;
                self.run_length = 0.0;
            }
        }
        self.plan.segments.push(seg);
    }

    fn advance(&mut self, length: f64, h: f64) {
        self.run_length += length;
        self.steps = self.run_base + leg_steps(self.run_length, h);
    }

    /// Hovers in place until `clock` steps have elapsed.
    fn hold_until(&mut self, clock: usize) {
        if let Some(p) = self.position {
            if clock > self.steps {
                let steps = clock - self.steps;
                self.push(Segment::Hold { position: p, yaw: self.yaw, steps }, 1.0);
            }
        }
    }
}

/// Builds the full mission from the offset loops of every slice, indexed
/// bottom-up. `structure` is used for transfer clearance repair.
pub fn plan_mission(
    loops_by_slice: &[Vec<OffsetLoop>],
    structure: &PointGrid,
    cfg: &PlannerConfig,
    policy: BranchPolicy,
) -> Result<MissionPlan> {
    cfg.validate()?;
    let h = cfg.step();
    let n = cfg.n_agents;
    let mut agents: Vec<AgentState> = (0..n)
        .map(AgentState::new)
        .collect();
    let flagged: Vec<Waypoint> = loops_by_slice
        .iter()
        .flatten()
        .flat_map(|l| l.waypoints.iter().filter(|w| w.flagged).cloned())
        .collect();

    let mut clock = 0usize;
    let mut stages = 0usize;
    let mut previous: Vec<Obstacle> = Vec::new();
    for (s, loops) in loops_by_slice.iter().enumerate() {
        let mut obstacles: Vec<Obstacle> = loops.iter().map(|l| Obstacle::from_loop(l, cfg.omega)).collect();
        obstacles.extend(previous.iter().cloned());
        let slice_index = loops.first().map_or(s, |l| l.slice_index);
        let known = agents.iter().any(|a| a.position.is_some());
        let far = Point3::new(1e12, 1e12, 1e12);
        let positions: Vec<Point3> = agents.iter().map(|a| a.position.unwrap_or(far)).collect();
        let assignment = assign_slice(slice_index, loops, known.then_some(positions.as_slice()), n, policy)?;
        if assignment.tasks.is_empty() {
            continue;
        }
        stages += 1;
        let tasks = deconflict(assignment.tasks, cfg.d_s, slice_index)?;

        // Transfer phase.
        for a in agents.iter_mut() {
            let Some(first) = tasks.iter().find(|t| t.agent_id == a.plan.agent_id) else {
                continue;
            };
            let start = &first.waypoints[0];
            match a.position {
                None => {
                    a.position = Some(start.position);
                    a.yaw = start.yaw;
                    if clock > 0 {
                        a.plan.segments.push(Segment::Hold {
                            position: start.position,
                            yaw: start.yaw,
                            steps: clock,
                        });
                    }
                    a.steps = clock;
                    a.run_base = clock;
                }
                Some(p) => {
                    let points = build_transfer(p, start.position, structure, cfg.d_s, &obstacles, cfg.omega, h)?;
                    if points.len() > 1 {
                        a.push(
                            Segment::Transfer {
                                points,
                                yaw_from: a.yaw,
                                yaw_to: start.yaw,
                            },
                            h,
                        );
                    }
                }
            }
        }
        clock = agents.iter().map(|a| a.steps).max().unwrap_or(clock);
        agents.iter_mut().for_each(|a| a.hold_until(clock));

        // Coverage phase.
        for a in agents.iter_mut() {
            let id = a.plan.agent_id;
            for task in tasks.iter().filter(|t| t.agent_id == id) {
                let gap = GAP_STEPS * h;
                let mut run: Vec<Waypoint> = Vec::new();
                for w in &task.waypoints {
                    let here = run.last().map(|l| l.position).or(a.position);
                    if let Some(p) = here {
                        if (w.position - p).norm() > gap {
                            if !run.is_empty() {
                                a.push(Segment::Coverage(std::mem::take(&mut run)), h);
                            }
                            let points = build_transfer(p, w.position, structure, cfg.d_s, &obstacles, cfg.omega, h)?;
                            a.push(
                                Segment::Transfer {
                                    points,
                                    yaw_from: a.yaw,
                                    yaw_to: w.yaw,
                                },
                                h,
                            );
                        }
                    }
                    run.push(w.clone());
                }
                if !run.is_empty() {
                    a.push(Segment::Coverage(run), h);
                }
            }
        }
        clock = agents.iter().map(|a| a.steps).max().unwrap_or(clock);
        agents.iter_mut().for_each(|a| a.hold_until(clock));
        debug!("slice {slice_index}: {} tasks, clock {clock}", tasks.len());
        previous = loops.iter().map(|l| Obstacle::from_loop(l, cfg.omega)).collect();
    }

    let agents = agents
        .into_iter()
        .map(|mut a| {
            a.plan.update_length();
            a.plan
        })
        .collect();
    Ok(MissionPlan { agents, flagged, stages })
}

/// Orders the waypoints of agents sharing a loop; the lowest sector leads.
fn deconflict(mut tasks: Vec<Task>, d_s: f64, slice_index: usize) -> Result<Vec<Task>> {
    let mut loop_ids: Vec<usize> = tasks.iter().filter(|t| t.sectors > 1).map(|t| t.loop_id).collect();
    loop_ids.sort_unstable();
    loop_ids.dedup();
    for lid in loop_ids {
        let mut members: Vec<usize> = (0..tasks.len()).filter(|&i| tasks[i].loop_id == lid && tasks[i].sectors > 1).collect();
        members.sort_by_key(|&i| tasks[i].sector);
        let sets: Vec<Vec<Waypoint>> = members.iter().map(|&i| tasks[i].waypoints.clone()).collect();
        let ids: Vec<usize> = members.iter().map(|&i| tasks[i].agent_id).collect();
        if sets.len() == 2 {
            let ordered = schedule_deconflicted(&sets, d_s, slice_index, &ids, Candidates::ArcEnds)?;
            for (&i, wps) in members.iter().zip(ordered) {
                tasks[i].waypoints = wps;
            }
        } else {
            // Greedy farthest-point picks strand followers of a chain of
            // three or more; sectors are flown in angular order instead.
            check_lockstep(&sets, d_s, slice_index, &ids)?;
        }
    }
    Ok(tasks)
}

/// Planar distance between the current waypoints of two agents flying the
/// same loop, step by step.
pub fn lockstep_separation(a: &[Waypoint], b: &[Waypoint]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| planar_distance(&x.position, &y.position)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mission::trajectory::generate_trajectory;
    use crate::offset::build_offset_loop;
    use crate::topology::Loop;
    use std::collections::BTreeMap;
    use std::f64::consts::TAU;

    fn cylinder_loops(r: f64, levels: usize, centers: &[f64]) -> (Vec<Vec<OffsetLoop>>, PointGrid) {
        let mut all = Vec::new();
        let mut by_slice = Vec::new();
        for s in 0..levels {
            let z = s as f64 * 0.8;
            let mut loops = Vec::new();
            for (id, &cx) in centers.iter().enumerate() {
                let pts: Vec<Point3> = (0..120)
                    .map(|i| {
                        let a = i as f64 / 120.0 * TAU;
                        Point3::new(cx + r * a.cos(), r * a.sin(), z)
                    })
                    .collect();
                all.extend(pts.iter().copied());
                loops.push(build_offset_loop(&Loop::from_points(pts), 1.0, 0.5, s, id).unwrap());
            }
            by_slice.push(loops);
        }
        (by_slice, PointGrid::new(&all, 0.5))
    }

    fn cfg(n: usize) -> PlannerConfig {
        PlannerConfig {
            n_agents: n,
            ..PlannerConfig::default()
        }
    }

    fn key(w: &Waypoint) -> (usize, usize, u64, u64) {
        (w.slice_index, w.loop_id, w.position.x.to_bits(), w.position.y.to_bits())
    }

    #[test]
    fn conservation_of_waypoints() {
        let (loops, grid) = cylinder_loops(1.0, 4, &[0.0]);
        for n in 1..=3 {
            let m = plan_mission(&loops, &grid, &cfg(n), BranchPolicy::Strict).unwrap();
            let mut got: BTreeMap<_, usize> = BTreeMap::new();
            for a in &m.agents {
                for w in a.coverage_waypoints() {
                    *got.entry(key(w)).or_default() += 1;
                }
            }
            let expected: Vec<_> = loops.iter().flatten().flat_map(|l| l.waypoints.iter().map(key)).collect();
            assert_eq!(got.len(), expected.len(), "n = {n}");
            assert!(got.values().all(|&c| c == 1));
            assert!(expected.iter().all(|k| got.contains_key(k)));
        }
    }

    #[test]
    fn trajectories_share_a_clock() {
        let (loops, grid) = cylinder_loops(1.0, 3, &[0.0]);
        let c = cfg(3);
        let m = plan_mission(&loops, &grid, &c, BranchPolicy::Strict).unwrap();
        let lens: Vec<usize> = m.agents.iter().map(|a| generate_trajectory(a, c.v_d, c.t_s).len()).collect();
        assert!(lens.windows(2).all(|w| w[0] == w[1]), "{lens:?}");
        assert_eq!(m.stages, 3);
    }

    #[test]
    fn slices_are_visited_bottom_up() {
        let (loops, grid) = cylinder_loops(1.0, 4, &[0.0, 8.0]);
        let m = plan_mission(&loops, &grid, &cfg(2), BranchPolicy::Strict).unwrap();
        for a in &m.agents {
            let s: Vec<usize> = a.coverage_waypoints().map(|w| w.slice_index).collect();
            assert!(s.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn sequential_policy_covers_all_branches() {
        let (loops, grid) = cylinder_loops(0.5, 2, &[0.0, 6.0, 12.0]);
        let m = plan_mission(&loops, &grid, &cfg(2), BranchPolicy::Sequential).unwrap();
        let total: usize = m.agents.iter().map(AgentPlan::waypoint_count).sum();
        let expected: usize = loops.iter().flatten().map(|l| l.waypoints.len()).sum();
        assert_eq!(total, expected);
        assert!(plan_mission(&loops, &grid, &cfg(2), BranchPolicy::Strict).is_err());
    }

    #[test]
    fn flagged_waypoints_are_reported_not_flown() {
        let (mut loops, grid) = cylinder_loops(1.0, 2, &[0.0]);
        loops[1][0].waypoints[3].flagged = true;
        let m = plan_mission(&loops, &grid, &cfg(2), BranchPolicy::Strict).unwrap();
        assert_eq!(m.flagged.len(), 1);
        let flown: usize = m.agents.iter().map(AgentPlan::waypoint_count).sum();
        let all: usize = loops.iter().flatten().map(|l| l.waypoints.len()).sum();
        assert_eq!(flown, all - 1);
    }

    #[test]
    fn lockstep_pairs_stay_apart() {
        let (loops, grid) = cylinder_loops(1.5, 1, &[0.0]);
        let c = cfg(2);
        let m = plan_mission(&loops, &grid, &c, BranchPolicy::Strict).unwrap();
        let a: Vec<Waypoint> = m.agents[0].coverage_waypoints().cloned().collect();
        let b: Vec<Waypoint> = m.agents[1].coverage_waypoints().cloned().collect();
        for d in lockstep_separation(&a, &b) {
            assert!(d > c.d_s);
        }
    }
}
