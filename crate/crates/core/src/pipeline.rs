//! End-to-end planning: slice, detect loops, offset, assign and sample.

use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

use log::info;

use crate::error::{Error, Result};
use crate::geometry::PointGrid;
use crate::mission::{generate_trajectory, plan_mission, BranchPolicy, MissionPlan, Trajectory};
use crate::model_io::{PlannerConfig, StructureModel};
use crate::offset::{build_offset_loop, dump_offsets, OffsetLoop};
use crate::slicer::{dump_slices, slice_model, Slice};
use crate::topology::{analyze_slices, dump_loops, SliceLoopSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Config,
    Model,
    Slice,
    Topology,
    Offset,
    Mission,
    Trajectory,
    Verify,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Model => "model",
            Stage::Slice => "slice",
            Stage::Topology => "topology",
            Stage::Offset => "offset",
            Stage::Mission => "mission",
            Stage::Trajectory => "trajectory",
            Stage::Verify => "verify",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

#[derive(Debug, Clone)]
pub struct PlanOutput {
    pub slices: Vec<Slice>,
    pub loops: Vec<SliceLoopSet>,
    /// Offset loops per slice, bottom-up.
    pub offsets: Vec<Vec<OffsetLoop>>,
    pub mission: MissionPlan,
    pub trajectories: Vec<Trajectory>,
    pub timings: Vec<(Stage, Duration)>,
}

impl PlanOutput {
    pub fn waypoint_count(&self) -> usize {
        self.offsets.iter().flatten().map(|l| l.waypoints.len()).sum()
    }

    /// Writes slice, loop and offset tables into `dir`.
    pub fn dump_debug(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        dump_slices(dir, &self.slices)?;
        dump_loops(dir, &self.loops)?;
        let all: Vec<OffsetLoop> = self.offsets.iter().flatten().cloned().collect();
        dump_offsets(dir, &all)
    }
}

fn timed<T>(timings: &mut Vec<(Stage, Duration)>, stage: Stage, f: impl FnOnce() -> Result<T>) -> std::result::Result<T, StageError> {
    let start = Instant::now();
    let out = f().at(stage);
    let elapsed = start.elapsed();
    info!("{stage}: {:.1} ms", elapsed.as_secs_f64() * 1e3);
    timings.push((stage, elapsed));
    out
}

/// Plans a mission for `model`. Waypoints are spaced at one trajectory step.
pub fn plan(model: &StructureModel, cfg: &PlannerConfig, policy: BranchPolicy) -> std::result::Result<PlanOutput, StageError> {
    cfg.validate().at(Stage::Config)?;
    let mut timings = Vec::new();
    let slices = timed(&mut timings, Stage::Slice, || slice_model(model, cfg.delta_lambda()))?;
    let loops = timed(&mut timings, Stage::Topology, || analyze_slices(&slices, cfg.d_min, cfg.seed))?;
    let offsets = timed(&mut timings, Stage::Offset, || {
        loops
            .iter()
            .map(|set| {
                set.loops
                    .iter()
                    .enumerate()
                    .map(|(id, lp)| build_offset_loop(lp, cfg.omega, cfg.step(), set.slice_index, id))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mission = timed(&mut timings, Stage::Mission, || {
        let grid = PointGrid::new(model.points(), cfg.d_s.max(cfg.sample_pitch));
        plan_mission(&offsets, &grid, cfg, policy)
    })?;
    let trajectories = timed(&mut timings, Stage::Trajectory, || {
        Ok(mission.agents.iter().map(|a| generate_trajectory(a, cfg.v_d, cfg.t_s)).collect())
    })?;
    Ok(PlanOutput {
        slices,
        loops,
        offsets,
        mission,
        trajectories,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{generate, FixtureSpec};

    #[test]
    fn stage_prefix_in_message() {
        let model = generate(&FixtureSpec::cylinder(1.0, 3.0, 0.1)).unwrap();
        let cfg = PlannerConfig {
            omega: 5.0,
            ..PlannerConfig::default()
        };
        let err = plan(&model, &cfg, BranchPolicy::Strict).unwrap_err();
        assert_eq!(err.stage, Stage::Config);
        assert!(err.to_string().starts_with("config: "));
    }

    #[test]
    fn small_cylinder_end_to_end() {
        let model = generate(&FixtureSpec::cylinder(1.0, 3.0, 0.1)).unwrap();
        let cfg = PlannerConfig::default();
        let out = plan(&model, &cfg, BranchPolicy::Strict).unwrap();
        assert_eq!(out.trajectories.len(), cfg.n_agents);
        assert!(out.loops.iter().all(|s| s.k() == 1));
        let flown: usize = out.mission.agents.iter().map(|a| a.waypoint_count()).sum();
        assert_eq!(flown + out.mission.flagged.len(), out.waypoint_count());
        let stages: Vec<Stage> = out.timings.iter().map(|t| t.0).collect();
        assert_eq!(stages, vec![Stage::Slice, Stage::Topology, Stage::Offset, Stage::Mission, Stage::Trajectory]);
    }
}
