//! Branch and bound for the unit commitment problem over the hull
//! relaxation.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::conic::{self, SolverSettings, Status};
use crate::error::{Error, Result};
use crate::hull::{build_chp_primal, solve_fixed_commitment, BuildOptions, HullMode};
use crate::instance::Instance;
use crate::oracle::best_commitment;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcedOptions {
    /// Relative gap `(incumbent - bound) / |incumbent|` at which the search
    /// stops.
    pub mipgap: f64,
    pub node_limit: usize,
}

impl Default for UcedOptions {
    fn default() -> Self {
        UcedOptions { mipgap: 1e-4, node_limit: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UcedStatus {
    Optimal,
    NodeLimit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UcedResult {
    pub schedule: Schedule,
    /// `v(d)`, the cost of `schedule`.
    pub cost: f64,
    /// Lower bound on the optimal cost.
    pub bound: f64,
    pub nodes: usize,
    pub status: UcedStatus,
}

const INT_TOL: f64 = 1e-6;

struct Node {
    bound: f64,
    seq: usize,
    /// `(unit, period, value)` fixings.
    fix: Vec<(usize, usize, bool)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: lowest bound first, then oldest node
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

/// Minimum-cost commitment and dispatch. Nodes are taken best bound first,
/// branching on the most fractional commitment variable with the lowest
/// `(unit, period)` index breaking ties. Once every `x` of a node is
/// integral its dispatch is solved exactly and the node closes, so the
/// start-up variables never need branching.
pub fn solve_uced(inst: &Instance, opts: UcedOptions, settings: &SolverSettings) -> Result<UcedResult> {
    let plain;
    let inst = if inst.anchors.is_empty() {
        inst
    } else {
        plain = Instance { anchors: Vec::new(), ..inst.clone() };
        &plain
    };
    let mode = if inst.has_ramping() { HullMode::Achp1 } else { HullMode::Exact };
    let (build, handles) = build_chp_primal(inst, mode, BuildOptions::default())?;
    let xvars: Vec<Vec<conic::Var>> = handles.units.iter().map(|u| u.as_ref().expect("all units are modelled").x.clone()).collect();

    let mut incumbent: Option<(f64, Schedule)> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut nodes = 0;
    let mut tried: HashSet<Vec<Vec<bool>>> = HashSet::new();
    heap.push(Node { bound: f64::NEG_INFINITY, seq, fix: Vec::new() });
    let gap_ok = |bound: f64, inc: &Option<(f64, Schedule)>| {
        inc.as_ref().is_some_and(|(c, _)| c - bound <= opts.mipgap * c.abs().max(1e-9) + 1e-9 * (1.0 + c.abs()))
    };

    while let Some(node) = heap.peek() {
        if gap_ok(node.bound, &incumbent) {
            break;
        }
        if nodes >= opts.node_limit {
            break;
        }
        let node = heap.pop().expect("peeked");
        nodes += 1;
        let mut b = build.clone();
        let mut conflict = false;
        for &(g, t, v) in &node.fix {
            let val = v as u8 as f64;
            let (lo, hi) = b.bounds(xvars[g][t]);
            if val < lo || val > hi {
                conflict = true;
            }
            b.set_bounds(xvars[g][t], val, val);
        }
        if conflict {
            continue;
        }
        let (prog, sol) = conic::solve_build(&b, settings)?;
        match sol.status {
            Status::Optimal => {}
            Status::Infeasible => continue,
            status => return Err(Error::Solver { status }),
        }
        let bound = sol.objective.max(node.bound);
        if gap_ok(bound, &incumbent) {
            continue;
        }
        let vals = prog.values(&sol.x);
        let x: Vec<Vec<f64>> = xvars.iter().map(|vs| vs.iter().map(|v| vals[v.0]).collect()).collect();

        // roundings to the nearest feasible commitment and to the one
        // covering every fractional period
        for optimistic in [false, true] {
            let xr: Vec<Vec<bool>> = inst
                .units
                .iter()
                .zip(&x)
                .map(|(u, row)| {
                    let gains: Vec<f64> = row
                        .iter()
                        .map(|&v| if optimistic { if v > INT_TOL { 1.0 } else { -1.0 } } else { 2.0 * v - 1.0 })
                        .collect();
                    best_commitment(u, &gains)
                })
                .collect();
            if tried.insert(xr.clone()) {
                try_incumbent(inst, &xr, settings, &mut incumbent)?;
            }
        }

        let mut pick: Option<(usize, usize, f64)> = None;
        for (g, row) in x.iter().enumerate() {
            for (t, &v) in row.iter().enumerate() {
                let frac = (v - v.round()).abs();
                if frac > INT_TOL && pick.is_none_or(|(_, _, f)| frac > f + 1e-12) {
                    pick = Some((g, t, frac));
                }
            }
        }
        match pick {
            None => {
                let xr: Vec<Vec<bool>> = x.iter().map(|r| r.iter().map(|&v| v > 0.5).collect()).collect();
                if tried.insert(xr.clone()) {
                    try_incumbent(inst, &xr, settings, &mut incumbent)?;
                }
            }
            Some((g, t, _)) => {
                for v in [false, true] {
                    seq += 1;
                    let mut fix = node.fix.clone();
                    fix.push((g, t, v));
                    heap.push(Node { bound, seq, fix });
                }
            }
        }
    }

    let Some((cost, schedule)) = incumbent else {
        return Err(if heap.is_empty() {
            Error::Infeasible("no commitment schedule meets the demand".into())
        } else {
            Error::Infeasible(format!("no integral schedule found within {nodes} nodes"))
        });
    };
    let open = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let exhausted = heap.is_empty() || gap_ok(open, &Some((cost, schedule.clone())));
    let bound = open.min(cost);
    let status = if exhausted { UcedStatus::Optimal } else { UcedStatus::NodeLimit };
    Ok(UcedResult { schedule, cost, bound, nodes, status })
}

fn try_incumbent(inst: &Instance, x: &[Vec<bool>], settings: &SolverSettings, incumbent: &mut Option<(f64, Schedule)>) -> Result<()> {
    if let Some(fd) = solve_fixed_commitment(inst, x, settings)? {
        let cost = fd.schedule.cost(inst);
        if incumbent.as_ref().is_none_or(|(c, _)| cost < c - 1e-9 * (1.0 + c.abs())) {
            *incumbent = Some((cost, fd.schedule));
        }
    }
    Ok(())
}
