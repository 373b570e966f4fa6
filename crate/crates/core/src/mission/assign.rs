//! Agent-to-branch assignment for one slice.
//!
//! With `m` loops (branches) in a slice and `n` agents:
//! * `m == 1`: the loop is cut into `n` contiguous angular sectors of equal
//!   waypoint count, one per agent;
//! * `1 < m <= n`: agents are apportioned to loops by largest remainder on
//!   loop perimeter (at least one each), then each loop is cut into sectors;
//! * `m > n`: rejected under [`BranchPolicy::Strict`]; under
//!   [`BranchPolicy::Sequential`] whole loops are packed onto agents by
//!   longest-processing-time and flown one after another.
//!
//! Work units are matched to agents greedily by the distance from each
//! agent's current position to the unit's entry point.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Point3};
use crate::offset::{OffsetLoop, Waypoint};

/// What to do when a slice has more branches than agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchPolicy {
    /// Fail with [`Error::NotEnoughAgents`].
    Strict,
    /// Let agents cover several whole branches in turn.
    #[default]
    Sequential,
}

/// A piece of one loop given to one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub agent_id: usize,
    pub loop_id: usize,
    /// Sector index within the loop; 0 for a whole loop.
    pub sector: usize,
    /// Number of agents sharing the loop in this slice.
    pub sectors: usize,
    pub center: Point2,
    /// Waypoints in flight order (angular order before deconfliction).
    pub waypoints: Vec<Waypoint>,
}

/// The tasks of one slice, in execution order for each agent.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceAssignment {
    pub slice_index: usize,
    pub tasks: Vec<Task>,
}

impl SliceAssignment {
    pub fn tasks_of(&self, agent_id: usize) -> impl Iterator<Item = &Task> {
        self.tasks.iter().filter(move |t| t.agent_id == agent_id)
    }
}

/// Splits `n` as evenly as possible into `parts` contiguous index ranges.
pub fn sector_bounds(n: usize, parts: usize) -> Vec<(usize, usize)> {
    (0..parts).map(|i| (i * n / parts, (i + 1) * n / parts)).collect()
}

/// Largest-remainder apportionment of `seats` over `weights`, each share ≥ 1.
///
/// Requires `seats >= weights.len()`.
pub fn apportion(weights: &[f64], seats: usize) -> Vec<usize> {
    let m = weights.len();
    assert!(seats >= m, "apportion needs at least one seat per weight");
    let total: f64 = weights.iter().sum();
    let quota: Vec<f64> = weights
        .iter()
        .map(|w| if total > 0.0 { seats as f64 * w / total } else { seats as f64 / m as f64 })
        .collect();
    let mut counts: Vec<usize> = quota.iter().map(|q| (q.floor() as usize).max(1)).collect();
    let surplus = |c: &[usize], i: usize| quota[i] - c[i] as f64;
    while counts.iter().sum::<usize>() > seats {
        let i = (0..m)
            .filter(|&i| counts[i] > 1)
            .min_by(|&a, &b| surplus(&counts, a).total_cmp(&surplus(&counts, b)).then(b.cmp(&a)))
            .expect("some share exceeds one");
        counts[i] -= 1;
    }
    while counts.iter().sum::<usize>() < seats {
        let i = (0..m)
            .max_by(|&a, &b| surplus(&counts, a).total_cmp(&surplus(&counts, b)).then(b.cmp(&a)))
            .expect("weights are non-empty");
        counts[i] += 1;
    }
    counts
}

/// Longest-processing-time packing of `weights` into `bins` bins.
/// Returns the item indices of each bin.
pub fn lpt_bins(weights: &[f64], bins: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut out = vec![Vec::new(); bins];
    let mut load = vec![0.0f64; bins];
    for i in order {
        let b = (0..bins)
            .min_by(|&x, &y| load[x].total_cmp(&load[y]).then(x.cmp(&y)))
            .expect("at least one bin");
        out[b].push(i);
        load[b] += weights[i];
    }
    out
}

fn usable(lp: &OffsetLoop) -> Vec<Waypoint> {
    lp.waypoints.iter().filter(|w| !w.flagged).cloned().collect()
}

fn perimeter(wps: &[Waypoint]) -> f64 {
    let n = wps.len();
    if n < 2 {
        return 0.0;
    }
    (0..n)
        .map(|i| crate::geometry::planar_distance(&wps[i].position, &wps[(i + 1) % n].position))
        .sum()
}

fn nearest_index(wps: &[Waypoint], to: &[Point3]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, w) in wps.iter().enumerate() {
        for p in to {
            let d = (w.position - p).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
    }
    best.0
}

enum Unit {
    Sector { loop_idx: usize, sector: usize, sectors: usize, waypoints: Vec<Waypoint> },
    Whole(Vec<usize>),
}

/// Assigns the loops of one slice to agents.
///
/// `positions` holds each agent's current position; `None` on the first
/// slice, in which case work unit `i` goes to agent `i`.
pub fn assign_slice(
    slice_index: usize,
    loops: &[OffsetLoop],
    positions: Option<&[Point3]>,
    n_agents: usize,
    policy: BranchPolicy,
) -> Result<SliceAssignment> {
    if n_agents == 0 {
        return Err(Error::Invalid("n_agents must be >= 1".into()));
    }
    let live: Vec<(usize, Vec<Waypoint>)> = loops
        .iter()
        .enumerate()
        .map(|(i, l)| (i, usable(l)))
        .filter(|(_, w)| !w.is_empty())
        .collect();
    let m = live.len();
    if m == 0 {
        return Ok(SliceAssignment { slice_index, tasks: Vec::new() });
    }
    if m > n_agents && policy == BranchPolicy::Strict {
        return Err(Error::NotEnoughAgents {
            slice: slice_index,
            branches: m,
            agents: n_agents,
        });
    }
    let all_positions: Vec<Point3> = positions.map(|p| p.to_vec()).unwrap_or_default();

    let mut units: Vec<Unit> = Vec::new();
    if m > n_agents {
        let weights: Vec<f64> = live.iter().map(|(_, w)| perimeter(w)).collect();
        for bin in lpt_bins(&weights, n_agents) {
            if !bin.is_empty() {
                units.push(Unit::Whole(bin.into_iter().map(|k| live[k].0).collect()));
            }
        }
    } else {
        let weights: Vec<f64> = live.iter().map(|(_, w)| perimeter(w)).collect();
        let shares = apportion(&weights, n_agents);
        for ((loop_idx, wps), share) in live.iter().zip(shares) {
            if share == 1 {
                units.push(Unit::Whole(vec![*loop_idx]));
                continue;
            }
            let start = nearest_index(wps, &all_positions);
            let mut ring = wps.clone();
            ring.rotate_left(start);
            for (sector, (a, b)) in sector_bounds(ring.len(), share).into_iter().enumerate() {
                if a < b {
                    units.push(Unit::Sector {
                        loop_idx: *loop_idx,
                        sector,
                        sectors: share,
                        waypoints: ring[a..b].to_vec(),
                    });
                }
            }
        }
    }

    let unit_owner = match positions {
        None => (0..units.len()).map(|u| u.min(n_agents - 1)).collect(),
        Some(pos) => greedy_match(&units, loops, pos),
    };

    let mut tasks = Vec::new();
    for (unit, agent_id) in units.into_iter().zip(unit_owner) {
        match unit {
            Unit::Sector { loop_idx, sector, sectors, waypoints } => tasks.push(Task {
                agent_id,
                loop_id: loops[loop_idx].loop_id,
                sector,
                sectors,
                center: loops[loop_idx].center,
                waypoints,
            }),
            Unit::Whole(mut pending) => {
                let mut here: Vec<Point3> = all_positions.get(agent_id).copied().into_iter().collect();
                while !pending.is_empty() {
                    // Next loop: the one with the waypoint nearest to the current position.
                    let (k, start) = pending
                        .iter()
                        .enumerate()
                        .map(|(k, &li)| {
                            let wps = usable(&loops[li]);
                            let s = nearest_index(&wps, &here);
                            let d = here.first().map_or(0.0, |p| (wps[s].position - p).norm());
                            (k, s, d)
                        })
                        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))
                        .map(|(k, s, _)| (k, s))
                        .expect("pending is non-empty");
                    let li = pending.remove(k);
                    let mut ring = usable(&loops[li]);
                    ring.rotate_left(start);
                    here = vec![ring.last().expect("non-empty loop").position];
                    tasks.push(Task {
                        agent_id,
                        loop_id: loops[li].loop_id,
                        sector: 0,
                        sectors: 1,
                        center: loops[li].center,
                        waypoints: ring,
                    });
                }
            }
        }
    }
    Ok(SliceAssignment { slice_index, tasks })
}

fn unit_distance(unit: &Unit, loops: &[OffsetLoop], p: &Point3) -> f64 {
    match unit {
        Unit::Sector { waypoints, .. } => (waypoints[0].position - p).norm(),
        Unit::Whole(idx) => idx
            .iter()
            .flat_map(|&i| usable(&loops[i]))
            .map(|w| (w.position - p).norm())
            .fold(f64::INFINITY, f64::min),
    }
}

/// Greedy nearest matching: repeatedly take the closest free (agent, unit) pair.
fn greedy_match(units: &[Unit], loops: &[OffsetLoop], positions: &[Point3]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (u, unit) in units.iter().enumerate() {
        for (a, p) in positions.iter().enumerate() {
            pairs.push((unit_distance(unit, loops, p), a, u));
        }
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut owner = vec![usize::MAX; units.len()];
    let mut busy = vec![false; positions.len()];
    for (_, a, u) in pairs {
        if owner[u] == usize::MAX && !busy[a] {
            owner[u] = a;
            busy[a] = true;
        }
    }
    owner
}

/// Assigns every slice, predicting each agent's position as the last
/// waypoint of its previous work (before deconfliction reorders it).
pub fn assign_agents(
    loops_by_slice: &[Vec<OffsetLoop>],
    n_agents: usize,
    policy: BranchPolicy,
) -> Result<Vec<SliceAssignment>> {
    let mut positions: Option<Vec<Point3>> = None;
    let mut out = Vec::with_capacity(loops_by_slice.len());
    for (s, loops) in loops_by_slice.iter().enumerate() {
        let slice_index = loops.first().map_or(s, |l| l.slice_index);
        let a = assign_slice(slice_index, loops, positions.as_deref(), n_agents, policy)?;
        if !a.tasks.is_empty() {
            let mut pos = positions.unwrap_or_else(|| {
                let mut p = vec![a.tasks[0].waypoints[0].position; n_agents];
                for t in &a.tasks {
                    p[t.agent_id] = t.waypoints[0].position;
                }
                p
            });
            for t in &a.tasks {
                pos[t.agent_id] = t.waypoints.last().expect("tasks are non-empty").position;
            }
            positions = Some(pos);
        }
        out.push(a);
    }
    Ok(out)
}
