use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn ccpp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccpp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run ccpp")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture(dir: &Path, name: &str, pitch: Option<&str>) -> PathBuf {
    let file = format!("{name}.xyz");
    let mut args = vec!["fixture", name, "--out", &file];
    if let Some(p) = pitch {
        args.extend(["--pitch", p]);
    }
    let o = ccpp(&args, dir);
    assert!(o.status.success(), "{}", stderr(&o));
    dir.join(file)
}

fn config_text(omega: f64) -> String {
    format!(
        "alpha_deg = 60\nr_max = 4\nomega = {omega}\nd_min = 0.3\nd_s = 0.5\nn_agents = 2\nv_d = 0.5\nt_s = 1\nsample_pitch = 0.15\nseed = 7\n"
    )
}

fn trajectories(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("trajectory_"))
        .collect();
    names.sort();
    names
}

#[test]
fn plan_writes_one_file_per_agent() {
    let tmp = TempDir::new().unwrap();
    fixture(tmp.path(), "cylinder", Some("0.2"));
    fs::write(tmp.path().join("run.cfg"), config_text(1.0)).unwrap();
    let o = ccpp(&["plan", "--model", "cylinder.xyz", "--config", "run.cfg", "--out", "out", "--dump-debug"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    assert_eq!(trajectories(&out), vec!["trajectory_0.csv", "trajectory_1.csv"]);
    let debug: Vec<String> = fs::read_dir(out.join("debug"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    for prefix in ["slice_0_", "loops_0.txt", "offset_0_0.txt"] {
        assert!(debug.iter().any(|n| n.starts_with(prefix)), "{prefix} missing from {debug:?}");
    }

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["inputs"]["model"]["sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["inputs"]["config"].is_object());
    assert!(manifest["timings_ms"]["topology"].is_number());
    assert!(manifest["config"].as_str().unwrap().contains("alpha_deg = 60\n"));

    let mission: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("mission.json")).unwrap()).unwrap();
    assert_eq!(mission["agents"].as_array().unwrap().len(), 2);
    assert!(mission["loops_per_slice"].as_array().unwrap().iter().all(|k| k == 1));
}

#[test]
fn agents_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    fixture(tmp.path(), "cylinder", Some("0.2"));
    let o = ccpp(&["plan", "--model", "cylinder.xyz", "--agents", "3", "--out", "out"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(trajectories(&tmp.path().join("out")).len(), 3);
}

#[test]
fn bad_config_names_the_stage() {
    let tmp = TempDir::new().unwrap();
    fixture(tmp.path(), "cylinder", Some("0.2"));
    fs::write(tmp.path().join("bad.cfg"), config_text(5.0)).unwrap();
    let o = ccpp(&["plan", "--model", "cylinder.xyz", "--config", "bad.cfg", "--out", "out"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config: "), "{}", stderr(&o));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn identical_runs_give_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    fixture(tmp.path(), "cylinder", Some("0.2"));
    for out in ["a", "b"] {
        let o = ccpp(&["plan", "--model", "cylinder.xyz", "--seed", "11", "--out", out], tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for name in trajectories(&a) {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name}");
    }
    assert_eq!(fs::read(a.join("mission.json")).unwrap(), fs::read(b.join("mission.json")).unwrap());
    let digests = |d: &Path| {
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("manifest.json")).unwrap()).unwrap();
        m["outputs"].clone()
    };
    assert_eq!(digests(&a), digests(&b));
}

#[test]
fn verify_accepts_fresh_plan_and_rejects_conflicts() {
    let tmp = TempDir::new().unwrap();
    fixture(tmp.path(), "cylinder", Some("0.2"));
    let o = ccpp(&["plan", "--model", "cylinder.xyz", "--out", "out"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));

    let o = ccpp(&["verify", "--model", "cylinder.xyz", "--trajectories", "out", "--plots", "plots"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stdout(&o);
    assert!(report.contains("covered_fraction = "));
    assert!(report.contains("violations = 0"));
    assert_eq!(fs::read_dir(tmp.path().join("plots")).unwrap().count(), 5);

    // Two agents flying the same path.
    let out = tmp.path().join("out");
    fs::copy(out.join("trajectory_0.csv"), out.join("trajectory_1.csv")).unwrap();
    let o = ccpp(&["verify", "--model", "cylinder.xyz", "--trajectories", "out"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
    let count: usize = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("violations = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(count > 0);
    assert!(stderr(&o).contains(&format!("{count} violations")));
}

#[test]
fn corrupted_row_names_file_and_line() {
    let tmp = TempDir::new().unwrap();
    fixture(tmp.path(), "cylinder", Some("0.2"));
    assert!(ccpp(&["plan", "--model", "cylinder.xyz", "--out", "out"], tmp.path()).status.success());
    let path = tmp.path().join("out").join("trajectory_1.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[4] = "3,not-a-number,0,0,0,0,0,0";
    fs::write(&path, lines.join("\n")).unwrap();
    let o = ccpp(&["verify", "--model", "cylinder.xyz", "--trajectories", "out"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("trajectory_1.csv:5"), "{err}");
}

#[test]
fn missing_trajectory_dir_is_io() {
    let tmp = TempDir::new().unwrap();
    fixture(tmp.path(), "cylinder", Some("0.3"));
    let o = ccpp(&["verify", "--model", "cylinder.xyz", "--trajectories", "nowhere"], tmp.path());
    assert_eq!(o.status.code(), Some(5));
}

fn slice_ks(report: &str) -> Vec<usize> {
    report
        .lines()
        .filter(|l| l.starts_with("slice "))
        .map(|l| l.rsplit("k = ").next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn inspect_pillars_reports_two_loops() {
    let tmp = TempDir::new().unwrap();
    fixture(tmp.path(), "pillars", None);
    let o = ccpp(&["inspect-model", "--model", "pillars.xyz"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let ks = slice_ks(&stdout(&o));
    assert!(!ks.is_empty());
    assert!(ks.iter().all(|&k| k == 2), "{ks:?}");
    assert!(stdout(&o).starts_with("points = "));
}

#[test]
fn inspect_turbine_goes_from_one_to_three() {
    let tmp = TempDir::new().unwrap();
    fixture(tmp.path(), "turbine", None);
    let o = ccpp(&["inspect-model", "--model", "turbine.xyz"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let mut ks = slice_ks(&stdout(&o));
    assert_eq!(ks.first(), Some(&1));
    assert_eq!(ks.last(), Some(&3));
    ks.dedup();
    assert_eq!(ks, vec![1, 3]);
}

#[test]
fn inspect_empty_file_fails() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("empty.xyz"), "").unwrap();
    let o = ccpp(&["inspect-model", "--model", "empty.xyz"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model: "));
}

#[test]
fn strict_branches_with_too_few_agents_is_infeasible() {
    let tmp = TempDir::new().unwrap();
    fixture(tmp.path(), "pillars", Some("0.2"));
    let o = ccpp(
        &["plan", "--model", "pillars.xyz", "--agents", "1", "--strict-branches", "--out", "out"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("mission: "), "{}", stderr(&o));
    let o = ccpp(&["plan", "--model", "pillars.xyz", "--agents", "1", "--out", "out"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn unknown_fixture_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let o = ccpp(&["fixture", "teapot", "--out", "t.xyz"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("t.xyz").exists());
}
