use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ccpp::fixtures::{generate, FixtureSpec};
use ccpp::mission::{load_trajectory_csv, mission_duration, write_trajectory_csv, BranchPolicy, Trajectory};
use ccpp::model_io::{load_config, load_model, write_point_set, PlannerConfig, StructureModel};
use ccpp::pipeline::{self, PlanOutput, Stage};
use ccpp::slicer::slice_model;
use ccpp::topology::analyze_slices;
use ccpp::verify::{export_plot_data, verify_mission};
use log::info;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::exit::{at, CliError, IO, VALIDATION, VIOLATIONS};
use crate::{ConfigArgs, FixtureArgs, InspectArgs, PlanArgs, VerifyArgs};

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::new(IO, format!("{}: {e}", path.display()))
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::new(IO, format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn config(args: &ConfigArgs) -> Result<PlannerConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => at(load_config(path), Stage::Config)?,
        None => PlannerConfig::default(),
    };
    if let Some(n) = args.agents {
        cfg.n_agents = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    at(cfg.validate(), Stage::Config)?;
    Ok(cfg)
}

fn model(path: &Path, cfg: &PlannerConfig) -> Result<StructureModel, CliError> {
    at(load_model(path, cfg.sample_pitch), Stage::Model)
}

fn trajectory_name(id: usize) -> String {
    format!("trajectory_{id}.csv")
}

pub fn plan(args: &PlanArgs) -> Result<(), CliError> {
    let cfg = config(&args.config)?;
    let model = model(&args.model, &cfg)?;
    let policy = if args.strict_branches {
        BranchPolicy::Strict
    } else {
        BranchPolicy::Sequential
    };
    let out = pipeline::plan(&model, &cfg, policy)?;

    fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;
    let mut outputs = Map::new();
    for (id, traj) in out.trajectories.iter().enumerate() {
        let path = args.out.join(trajectory_name(id));
        at(write_trajectory_csv(&path, traj), Stage::Trajectory)?;
        outputs.insert(trajectory_name(id), Value::String(sha256_file(&path)?));
    }
    let summary = mission_summary(&out, &cfg)?;
    write_json(&args.out.join("mission.json"), &summary)?;
    if args.dump_debug {
        at(out.dump_debug(&args.out.join("debug")), Stage::Mission)?;
    }

    let mut inputs = Map::new();
    inputs.insert("model".into(), json!({ "path": args.model, "sha256": sha256_file(&args.model)? }));
    if let Some(path) = &args.config.config {
        inputs.insert("config".into(), json!({ "path": path, "sha256": sha256_file(path)? }));
    }
    let timings: Map<String, Value> = out
        .timings
        .iter()
        .map(|(stage, d)| (stage.name().to_string(), json!(d.as_secs_f64() * 1e3)))
        .collect();
    let manifest = json!({
        "tool": "ccpp",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "branch_policy": if args.strict_branches { "strict" } else { "sequential" },
        "config": cfg.to_text(),
        "inputs": inputs,
        "outputs": outputs,
        "timings_ms": timings,
    });
    write_json(&args.out.join("manifest.json"), &manifest)?;
    emit(&format!(
        "planned {} agents over {} stages: mission duration {} s, {} flagged waypoints; wrote {}\n",
        cfg.n_agents,
        out.mission.stages,
        summary["mission_duration_s"],
        out.mission.flagged.len(),
        args.out.display()
    ))
}

fn mission_summary(out: &PlanOutput, cfg: &PlannerConfig) -> Result<Value, CliError> {
    let durations = at(mission_duration(&out.trajectories, cfg.t_s), Stage::Trajectory)?;
    let agents: Vec<Value> = out
        .mission
        .agents
        .iter()
        .zip(&out.trajectories)
        .zip(&durations.per_agent)
        .map(|((a, t), d)| {
            json!({
                "id": a.agent_id,
                "trajectory": trajectory_name(a.agent_id),
                "coverage_waypoints": a.waypoint_count(),
                "path_length_m": a.total_path_length,
                "samples": t.len(),
                "duration_s": d,
            })
        })
        .collect();
    Ok(json!({
        "n_agents": cfg.n_agents,
        "slices": out.slices.len(),
        "loops_per_slice": out.loops.iter().map(|s| s.k()).collect::<Vec<_>>(),
        "stages": out.mission.stages,
        "waypoints": out.waypoint_count(),
        "flagged_waypoints": out.mission.flagged.len(),
        "mission_duration_s": durations.max,
        "agents": agents,
    }))
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// `trajectory_<id>.csv` files in `dir`, ordered by id.
fn trajectory_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| io_error(dir, e))?;
    let mut found: Vec<(usize, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_error(dir, e))?.path();
        let id = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix("trajectory_"))
            .and_then(|n| n.strip_suffix(".csv"))
            .and_then(|n| n.parse().ok());
        if let Some(id) = id {
            found.push((id, path));
        }
    }
    found.sort();
    if found.is_empty() {
        return Err(CliError::new(
            VALIDATION,
            format!("trajectory: no trajectory_<id>.csv files in {}", dir.display()),
        ));
    }
    Ok(found.into_iter().map(|(_, p)| p).collect())
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let cfg = config(&args.config)?;
    let model = model(&args.model, &cfg)?;
    let trajectories: Vec<Trajectory> = trajectory_files(&args.trajectories)?
        .iter()
        .map(|p| at(load_trajectory_csv(p), Stage::Trajectory))
        .collect::<Result<_, _>>()?;
    info!("verifying {} trajectories", trajectories.len());
    let report = verify_mission(&model, &trajectories, &cfg);
    emit(&report.to_text())?;
    if let Some(dir) = &args.plots {
        at(export_plot_data(dir, &report, &trajectories), Stage::Verify)?;
    }
    if report.is_safe() {
        Ok(())
    } else {
        Err(CliError::new(
            VIOLATIONS,
            format!("verify: {} violations", report.violations.len()),
        ))
    }
}

pub fn inspect_model(args: &InspectArgs) -> Result<(), CliError> {
    let cfg = config(&args.config)?;
    let model = model(&args.model, &cfg)?;
    let b = model.bounds();
    let dl = args.delta_lambda.unwrap_or_else(|| cfg.delta_lambda());
    let mut text = String::new();
    let _ = writeln!(text, "points = {}", model.len());
    let _ = writeln!(text, "bounds_min = {} {} {}", b.min.x, b.min.y, b.min.z);
    let _ = writeln!(text, "bounds_max = {} {} {}", b.max.x, b.max.y, b.max.z);
    let _ = writeln!(text, "delta_lambda = {dl}");
    let slices = at(slice_model(&model, dl), Stage::Slice)?;
    let loops = at(analyze_slices(&slices, cfg.d_min, cfg.seed), Stage::Topology)?;
    for (s, set) in slices.iter().zip(&loops) {
        let _ = writeln!(text, "slice {} z = {:.4} points = {} k = {}", s.index, s.lambda, s.points.len(), set.k());
    }
    emit(&text)
}

pub fn fixture(args: &FixtureArgs) -> Result<(), CliError> {
    let mut spec = FixtureSpec::named(&args.name).ok_or_else(|| {
        CliError::new(
            VALIDATION,
            format!("unknown fixture {:?}; expected cylinder, pillars, boxes or turbine", args.name),
        )
    })?;
    if let Some(pitch) = args.pitch {
        spec.sample_pitch = pitch;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let model = at(generate(&spec), Stage::Model)?;
    at(write_point_set(&args.out, model.points()), Stage::Model)?;
    emit(&format!("wrote {} points to {}\n", model.len(), args.out.display()))
}
