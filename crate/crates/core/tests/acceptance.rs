//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use ccpp::fixtures::{generate, FixtureSpec};
use ccpp::geometry::{normalize_angle, shortest_arc, Point3};
use ccpp::mission::{
    format_trajectory_csv, generate_trajectory, mission_duration, AgentPlan, BranchPolicy, Segment, Trajectory,
};
use ccpp::model_io::{PlannerConfig, StructureModel};
use ccpp::pipeline::{plan, PlanOutput};
use ccpp::topology::spectral::{adjacency_pairs, component_labels, spectral_component_count};
use ccpp::verify::{check_safety, verify_mission};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type SafetyCase = (&'static str, FixtureSpec, fn(usize) -> PlannerConfig);

fn outdoor(n: usize) -> PlannerConfig {
    PlannerConfig {
        n_agents: n,
        ..PlannerConfig::default()
    }
}

/// Desk-scale settings for the box stack.
fn indoor(n: usize) -> PlannerConfig {
    PlannerConfig {
        omega: 0.5,
        r_max: 2.0,
        d_min: 0.1,
        d_s: 0.3,
        v_d: 0.1,
        sample_pitch: 0.02,
        n_agents: n,
        ..PlannerConfig::default()
    }
}

fn model(spec: FixtureSpec) -> StructureModel {
    generate(&spec).expect("fixture generation")
}

fn run(model: &StructureModel, cfg: &PlannerConfig) -> Result<PlanOutput, String> {
    plan(model, cfg, BranchPolicy::Sequential).map_err(|e| e.to_string())
}

fn duration(out: &PlanOutput, cfg: &PlannerConfig) -> Result<f64, String> {
    mission_duration(&out.trajectories, cfg.t_s).map(|d| d.max).map_err(|e| e.to_string())
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fleet_time_scaling() -> Outcome {
    let turbine = model(FixtureSpec::turbine());
    let mut t = Vec::new();
    let mut slowest = 0.0f64;
    for n in 1..=3 {
        let cfg = outdoor(n);
        let start = Instant::now();
        let out = run(&turbine, &cfg)?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        t.push(duration(&out, &cfg)?);
    }
    let (r2, r3) = (t[1] / t[0], t[2] / t[0]);
    check(
        r2 <= 0.80 && r3 <= 0.60 && slowest < 30.0,
        format!(
            "T = {:.0}/{:.0}/{:.0} s, T2/T1 = {r2:.3} (<= 0.80), T3/T1 = {r3:.3} (<= 0.60), slowest plan {slowest:.2} s (< 30)",
            t[0], t[1], t[2]
        ),
    )
}

fn halving_indoor() -> Outcome {
    let boxes = model(FixtureSpec::boxes());
    let t1 = duration(&run(&boxes, &indoor(1))?, &indoor(1))?;
    let t2 = duration(&run(&boxes, &indoor(2))?, &indoor(2))?;
    let r = t2 / t1;
    check(
        (0.45..=0.60).contains(&r),
        format!("T1 = {t1:.0} s, T2 = {t2:.0} s, ratio {r:.3} in [0.45, 0.60]"),
    )
}

fn offset_exactness() -> Outcome {
    let (r, pitch) = (2.8, 0.1);
    let cyl = model(FixtureSpec::cylinder(r, 10.1, pitch));
    let cfg = outdoor(2);
    let out = run(&cyl, &cfg)?;
    let mut worst_offset = 0.0f64;
    let mut worst_radius = 0.0f64;
    let mut count = 0;
    for lp in out.offsets.iter().flatten() {
        for w in &lp.waypoints {
            let d = (w.position.x - w.source.x).hypot(w.position.y - w.source.y);
            worst_offset = worst_offset.max((d - cfg.omega).abs());
            let rho = w.position.x.hypot(w.position.y);
            worst_radius = worst_radius.max((rho - (r + cfg.omega)).abs());
            count += 1;
        }
    }
    check(
        count > 0 && worst_offset <= 1e-9 && worst_radius <= pitch,
        format!("{count} waypoints, max |d - omega| = {worst_offset:.2e} (<= 1e-9), max ring radius error {worst_radius:.2e} (<= {pitch})"),
    )
}

fn loop_counting() -> Outcome {
    let pillars = run(&model(FixtureSpec::pillars()), &outdoor(2))?;
    let pillar_ks: Vec<usize> = pillars.loops.iter().map(|s| s.k()).collect();
    let pillars_ok = !pillar_ks.is_empty() && pillar_ks.iter().all(|&k| k == 2);

    // A slice gathers points within half a spacing of its plane, so it is
    // clear of the hub only when that whole band is.
    let hub = ccpp::fixtures::TurbineDims::default().hub_top();
    let cfg = outdoor(2);
    let half_band = cfg.delta_lambda() / 2.0;
    let turbine = run(&model(FixtureSpec::turbine()), &cfg)?;
    let (above, below): (Vec<_>, Vec<_>) = turbine.loops.iter().partition(|s| s.lambda - half_band >= hub);
    let below: Vec<usize> = below.iter().map(|s| s.k()).collect();
    let above: Vec<usize> = above.iter().map(|s| s.k()).collect();
    let turbine_ok = !below.is_empty() && !above.is_empty() && below.iter().all(|&k| k == 1) && above.iter().all(|&k| k == 3);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.gen_range(10..120);
        let blobs = rng.gen_range(1..5);
        let centers: Vec<(f64, f64)> = (0..blobs).map(|_| (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0))).collect();
        let points: Vec<Point3> = (0..n)
            .map(|_| {
                let (cx, cy) = centers[rng.gen_range(0..blobs)];
                Point3::new(cx + rng.gen_range(-1.5..1.5), cy + rng.gen_range(-1.5..1.5), 0.0)
            })
            .collect();
        let d_min = rng.gen_range(0.2..1.2);
        let pairs = adjacency_pairs(&points, d_min);
        if spectral_component_count(points.len(), &pairs) != component_labels(points.len(), &pairs).0 {
            mismatches += 1;
        }
    }
    check(
        pillars_ok && turbine_ok && mismatches == 0,
        format!("pillars k = {pillar_ks:?}; turbine k below hub {below:?}, above {above:?}; spectral vs union-find mismatches {mismatches}/100"),
    )
}

fn safety() -> Outcome {
    let cases: Vec<SafetyCase> = vec![
        ("cylinder", FixtureSpec::cylinder(2.8, 10.1, 0.1), outdoor),
        ("pillars", FixtureSpec::pillars(), outdoor),
        ("boxes", FixtureSpec::boxes(), indoor),
        ("turbine", FixtureSpec::turbine(), outdoor),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, spec, config) in cases {
        let m = model(spec);
        for n in [2, 3] {
            let cfg = config(n);
            let out = run(&m, &cfg)?;
            let s = check_safety(&out.trajectories, cfg.d_s);
            ok &= s.violations.is_empty() && s.min_distance >= cfg.d_s;
            parts.push(format!("{name}/{n}: min {:.3} (d_s {}) viol {}", s.min_distance, cfg.d_s, s.violations.len()));
        }
    }
    check(ok, parts.join("; "))
}

/// The flown polyline of a plan, hovers removed.
fn flown_polyline(plan: &AgentPlan) -> Vec<Point3> {
    let mut pts: Vec<Point3> = Vec::new();
    for seg in &plan.segments {
        match seg {
            Segment::Coverage(w) => pts.extend(w.iter().map(|w| w.position)),
            Segment::Transfer { points, .. } => pts.extend(points.iter().copied()),
            Segment::Hold { position, .. } => pts.push(*position),
        }
    }
    pts.dedup();
    pts
}

fn trajectory_contract() -> Outcome {
    let cfg = PlannerConfig {
        v_d: 0.5,
        t_s: 1.0,
        ..outdoor(1)
    };
    let out = run(&model(FixtureSpec::cylinder(2.8, 10.1, 0.1)), &cfg)?;
    let traj = &out.trajectories[0];
    let path = flown_polyline(&out.mission.agents[0]);
    let lengths: Vec<f64> = path.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let point_at = |s: f64| {
        let mut rest = s;
        for (w, len) in path.windows(2).zip(&lengths) {
            if rest <= *len {
                return w[0] + (w[1] - w[0]) * (rest / len);
            }
            rest -= len;
        }
        *path.last().unwrap()
    };
    let last = traj.len() - 1;
    let mut worst_spacing = 0.0f64;
    let mut worst_speed = 0.0f64;
    for (j, s) in traj.samples.iter().enumerate().take(last) {
        worst_spacing = worst_spacing.max((s.position - point_at(0.5 * j as f64)).norm());
        worst_speed = worst_speed.max((s.velocity.norm() - 0.5).abs());
    }
    let end_ok = traj.samples[last].velocity.norm() == 0.0 && (traj.samples[last].position - *path.last().unwrap()).norm() < 1e-9;

    // Yaw along random transfers must follow the short arc.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut yaw_failures = 0;
    for _ in 0..500 {
        let (a, b) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        let len = rng.gen_range(0.6..12.0);
        let mut plan = AgentPlan::new(0);
        plan.segments.push(Segment::Transfer {
            points: vec![Point3::origin(), Point3::new(len, 0.0, 0.0)],
            yaw_from: a,
            yaw_to: b,
        });
        let t = generate_trajectory(&plan, 0.5, 1.0);
        let short = shortest_arc(a, b);
        let swept: f64 = t.samples.windows(2).map(|w| shortest_arc(w[0].yaw, w[1].yaw)).sum();
        let monotone = t.samples.windows(2).all(|w| shortest_arc(w[0].yaw, w[1].yaw) * short >= -1e-12);
        if !monotone || (swept - short).abs() > 1e-9 || (normalize_angle(t.samples[t.len() - 1].yaw) - normalize_angle(b)).abs() > 1e-9 {
            yaw_failures += 1;
        }
    }
    check(
        worst_spacing <= 1e-9 && worst_speed <= 1e-9 && end_ok && yaw_failures == 0,
        format!(
            "{} samples, max arc-length position error {worst_spacing:.2e}, max |speed - 0.5| {worst_speed:.2e}, final sample at rest {end_ok}, short-arc yaw failures {yaw_failures}/500",
            traj.len()
        ),
    )
}

fn coverage() -> Outcome {
    // A tall cylinder of the fountain radius: the horizontal cone cannot see
    // the bottom and top rims, so the height keeps those rings under 1 %.
    let cyl = model(FixtureSpec::cylinder(2.8, 150.0, 0.5));
    let cfg = PlannerConfig {
        d_min: 0.8,
        sample_pitch: 0.25,
        ..outdoor(2)
    };
    let out = run(&cyl, &cfg)?;
    let report = verify_mission(&cyl, &out.trajectories, &cfg);
    check(
        report.covered_fraction >= 0.99 && cfg.omega < cfg.r_max && (cfg.alpha.to_degrees() - 60.0).abs() < 1e-9,
        format!(
            "covered_fraction {:.4} (>= 0.99), {} of {} points unseen, alpha 60 deg, omega {} < r_max {}",
            report.covered_fraction,
            report.uncovered_points.len(),
            cyl.points().len(),
            cfg.omega,
            cfg.r_max
        ),
    )
}

fn digests(trajs: &[Trajectory]) -> Vec<String> {
    trajs
        .iter()
        .map(|t| {
            Sha256::digest(format_trajectory_csv(t).as_bytes())
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect()
        })
        .collect()
}

fn determinism() -> Outcome {
    let turbine = model(FixtureSpec::turbine());
    let cfg = outdoor(3);
    let a = digests(&run(&turbine, &cfg)?.trajectories);
    let b = digests(&run(&model(FixtureSpec::turbine()), &cfg)?.trajectories);
    check(a == b, format!("{} trajectory digests equal: {}", a.len(), a == b))
}

fn yaw_separation() -> Outcome {
    let (r, cfg) = (2.8, outdoor(2));
    let out = run(&model(FixtureSpec::cylinder(r, 10.1, 0.1)), &cfg)?;
    let ring = r + cfg.omega;
    // Widest angular gap between consecutive waypoints on any ring.
    let mut gap = 0.0f64;
    for lp in out.offsets.iter().flatten() {
        let mut angles: Vec<f64> = lp.waypoints.iter().map(|w| w.position.y.atan2(w.position.x)).collect();
        angles.sort_by(f64::total_cmp);
        for w in angles.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        if let (Some(first), Some(last)) = (angles.first(), angles.last()) {
            gap = gap.max(first + 2.0 * PI - last);
        }
    }
    let (a, b) = (&out.trajectories[0], &out.trajectories[1]);
    let (mut steps, mut good) = (0usize, 0usize);
    for (sa, sb) in a.samples.iter().zip(&b.samples) {
        let on_ring = |p: &Point3| (p.x.hypot(p.y) - ring).abs() < 0.05;
        if !(on_ring(&sa.position) && on_ring(&sb.position) && (sa.position.z - sb.position.z).abs() < 1e-9) {
            continue;
        }
        steps += 1;
        let ta = sa.position.y.atan2(sa.position.x);
        let tb = sb.position.y.atan2(sb.position.x);
        if (shortest_arc(ta, tb).abs() - PI).abs() <= gap + 1e-9 {
            good += 1;
        }
    }
    let frac = good as f64 / steps.max(1) as f64;
    check(
        steps > 0 && frac >= 0.95,
        format!("{good}/{steps} synchronized steps within one waypoint gap ({:.3} rad) of pi: {frac:.3} (>= 0.95)", gap),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("fleet-time scaling", fleet_time_scaling),
        ("halving check", halving_indoor),
        ("offset exactness", offset_exactness),
        ("loop counting", loop_counting),
        ("safety", safety),
        ("trajectory contract", trajectory_contract),
        ("coverage", coverage),
        ("determinism", determinism),
        ("yaw separation", yaw_separation),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
