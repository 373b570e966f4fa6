//! Max-distance deconfliction of agents sharing one loop.
//!
//! The first agent flies its waypoints in the given order. At every
//! synchronized step each following agent picks, among its candidate
//! waypoints, the one farthest (planar distance) from the previous agent's
//! current waypoint, provided that distance exceeds `d_s`. The candidate set
//! is finite, so exhaustive search gives the exact optimum.
//!
//! With [`Candidates::All`] every remaining waypoint is a candidate. On
//! non-circular loops the farthest point is often a corner, which makes the
//! follower zigzag across its sector. [`Candidates::ArcEnds`] only offers the
//! two ends of the follower's remaining arc, so each sector is flown as one
//! contiguous sweep.

use crate::error::{Error, Result};
use crate::geometry::planar_distance;
use crate::offset::Waypoint;

/// Which of a follower's remaining waypoints may be picked next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidates {
    All,
    /// First and last of the remaining waypoints, in the given order.
    ArcEnds,
}

/// Reorders each follower's waypoints; `sets[0]` is the leader.
///
/// Returns one waypoint sequence per agent; every input waypoint appears
/// exactly once. `slice` and `agent_ids` only label errors.
pub fn schedule_deconflicted(
    sets: &[Vec<Waypoint>],
    d_s: f64,
    slice: usize,
    agent_ids: &[usize],
    candidates: Candidates,
) -> Result<Vec<Vec<Waypoint>>> {
    let Some(leader) = sets.first() else {
        return Ok(Vec::new());
    };
    let mut out: Vec<Vec<Waypoint>> = Vec::with_capacity(sets.len());
    out.push(leader.clone());
    for j in 1..sets.len() {
        let mut remaining: Vec<Waypoint> = sets[j].clone();
        let mut seq = Vec::with_capacity(remaining.len());
        let reference = &out[j - 1];
        let mut step = 0;
        while !remaining.is_empty() {
            // A finished predecessor holds at its last waypoint.
            let target = reference.get(step).or(reference.last());
            let pick = match target {
                None => 0,
                Some(t) => {
                    let mut best: Option<(usize, f64)> = None;
                    let last = remaining.len() - 1;
                    for (i, w) in remaining.iter().enumerate() {
                        if candidates == Candidates::ArcEnds && i != 0 && i != last {
                            continue;
                        }
                        let d = planar_distance(&w.position, &t.position);
                        let better = match best {
                            None => true,
                            Some((bi, bd)) => d > bd || (d == bd && w.radial_angle < remaining[bi].radial_angle),
                        };
                        if better {
                            best = Some((i, d));
                        }
                    }
                    let (i, d) = best.expect("remaining is non-empty");
                    if d <= d_s {
                        return Err(Error::SchedulingInfeasible {
                            slice,
                            step,
                            agent: agent_ids.get(j).copied().unwrap_or(j),
                            leader: agent_ids.get(j - 1).copied().unwrap_or(j - 1),
                            d_s,
                        });
                    }
                    i
                }
            };
            seq.push(remaining.remove(pick));
            step += 1;
        }
        out.push(seq);
    }
    Ok(out)
}

/// Lockstep check of sets flown in their given order: at every step each
/// pair of agents (a finished agent stays at its last waypoint) must be more
/// than `d_s` apart in the plane.
pub fn check_lockstep(sets: &[Vec<Waypoint>], d_s: f64, slice: usize, agent_ids: &[usize]) -> Result<()> {
    let steps = sets.iter().map(Vec::len).max().unwrap_or(0);
    for step in 0..steps {
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                let (Some(pa), Some(pb)) = (
                    sets[a].get(step).or(sets[a].last()),
                    sets[b].get(step).or(sets[b].last()),
                ) else {
                    continue;
                };
                if planar_distance(&pa.position, &pb.position) <= d_s {
                    return Err(Error::SchedulingInfeasible {
                        slice,
                        step,
                        agent: agent_ids.get(b).copied().unwrap_or(b),
                        leader: agent_ids.get(a).copied().unwrap_or(a),
                        d_s,
                    });
                }
            }
        }
    }
    Ok(())
}
