//! Exhaustive unit commitment and economic dispatch for small instances.

use crate::conic::SolverSettings;
use crate::error::{Error, Result};
use crate::hull::solve_fixed_commitment;
use crate::instance::Instance;
use crate::schedule::{Schedule, UnitSchedule};

use super::dispatch::{economic_dispatch, Offer};
use super::schedules::{enumerate_schedules, CommitmentSchedule};

/// Optimal commitment and dispatch.
#[derive(Debug, Clone)]
pub struct UcedSolution {
    pub cost: f64,
    pub schedule: Schedule,
}

/// Minimum-cost UCED by enumeration of every combination of feasible unit
/// schedules. Dispatch of each surviving combination is closed-form on
/// balance-only systems and a fixed-commitment solve otherwise. Combinations
/// are visited in lexicographic order and ties keep the first one found.
pub fn brute_force_uced(inst: &Instance, settings: &SolverSettings) -> Result<UcedSolution> {
    let per_unit: Vec<Vec<CommitmentSchedule>> = inst
        .units
        .iter()
        .map(|u| enumerate_schedules(u.min_up, u.min_down, inst.horizon, u.initial))
        .collect::<Result<_>>()?;
    // fixed-cost lower bound of every schedule
    let floor: Vec<f64> = inst
        .units
        .iter()
        .map(|u| u.no_load_cost + u.cost.eval(u.cost.best_response(0.0, u.p_min, u.p_max)))
        .collect();
    let bounds: Vec<Vec<f64>> = per_unit
        .iter()
        .enumerate()
        .map(|(g, list)| {
            let u = &inst.units[g];
            list.iter()
                .map(|s| {
                    s.x.iter().filter(|&&b| b).count() as f64 * floor[g]
                        + s.u.iter().filter(|&&b| b).count() as f64 * u.startup_cost
                })
                .collect()
        })
        .collect();
    let best_rest: Vec<f64> = {
        let mins: Vec<f64> = bounds.iter().map(|b| b.iter().copied().fold(f64::INFINITY, f64::min)).collect();
        let mut rest = vec![0.0; mins.len() + 1];
        for g in (0..mins.len()).rev() {
            rest[g] = rest[g + 1] + mins[g];
        }
        rest
    };

    let mut search = Search { inst, settings, per_unit: &per_unit, bounds: &bounds, best_rest: &best_rest, pick: Vec::new(), best: None };
    search.dfs(0, 0.0)?;
    search.best.ok_or_else(|| Error::Infeasible("no commitment schedule meets the demand".into()))
}

struct Search<'a> {
    inst: &'a Instance,
    settings: &'a SolverSettings,
    per_unit: &'a [Vec<CommitmentSchedule>],
    bounds: &'a [Vec<f64>],
    best_rest: &'a [f64],
    pick: Vec<usize>,
    best: Option<UcedSolution>,
}

impl Search<'_> {
    /// Costs at or above this value cannot improve the incumbent.
    fn cutoff(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.cost - 1e-9 * (1.0 + b.cost.abs()))
    }

    fn dfs(&mut self, g: usize, partial: f64) -> Result<()> {
        if g == self.per_unit.len() {
            return self.evaluate();
        }
        for k in 0..self.per_unit[g].len() {
            let lb = partial + self.bounds[g][k] + self.best_rest[g + 1];
            if lb >= self.cutoff() {
                continue;
            }
            self.pick.push(k);
            self.dfs(g + 1, partial + self.bounds[g][k])?;
            self.pick.pop();
        }
        Ok(())
    }

    fn evaluate(&mut self) -> Result<()> {
        let inst = self.inst;
        let chosen: Vec<&CommitmentSchedule> = self.pick.iter().enumerate().map(|(g, &k)| &self.per_unit[g][k]).collect();
        // capacity screen
        for t in 0..inst.horizon {
            let (mut lo, mut hi) = (0.0, 0.0);
            for (g, s) in chosen.iter().enumerate() {
                if s.x[t] {
                    lo += inst.units[g].p_min;
                    hi += inst.units[g].p_max;
                }
            }
            let d = inst.total_demand(t);
            let tol = 1e-9 * (1.0 + d);
            let need = d + inst.reserve.as_ref().map_or(0.0, |r| r[t]);
            if d < lo - tol || need > hi + tol {
                return Ok(());
            }
        }
        let candidate = if inst.reserve.is_none() { self.closed_form(&chosen) } else { None };
        let candidate = match candidate {
            Some(c) => Some(c),
            None => {
                let x: Vec<Vec<bool>> = chosen.iter().map(|s| s.x.clone()).collect();
                solve_fixed_commitment(inst, &x, self.settings)?
                    .map(|f| UcedSolution { cost: f.schedule.cost(inst), schedule: f.schedule })
            }
        };
        if let Some(c) = candidate {
            if c.cost < self.cutoff() {
                self.best = Some(c);
            }
        }
        Ok(())
    }

    /// Period-by-period merit order; `None` when the result violates ramp or
    /// line limits, which the relaxation ignores.
    fn closed_form(&self, chosen: &[&CommitmentSchedule]) -> Option<UcedSolution> {
        let inst = self.inst;
        let mut p = vec![vec![0.0; inst.horizon]; inst.units.len()];
        for t in 0..inst.horizon {
            let on: Vec<usize> = (0..inst.units.len()).filter(|&g| chosen[g].x[t]).collect();
            let offers: Vec<Offer> = on
                .iter()
                .map(|&g| Offer { lo: inst.units[g].p_min, hi: inst.units[g].p_max, cost: &inst.units[g].cost })
                .collect();
            let (out, _) = economic_dispatch(&offers, inst.total_demand(t))?;
            for (k, &g) in on.iter().enumerate() {
                p[g][t] = out[k];
            }
        }
        let schedule = Schedule {
            units: chosen
                .iter()
                .zip(p)
                .map(|(s, p)| UnitSchedule { x: s.x.clone(), u: s.u.clone(), p, r: None })
                .collect(),
        };
        if inst.has_ramping() && schedule.check(inst, 1e-9).is_err() {
            return None;
        }
        if !lines_hold(inst, &schedule) {
            return None;
        }
        Some(UcedSolution { cost: schedule.cost(inst), schedule })
    }
}

fn lines_hold(inst: &Instance, s: &Schedule) -> bool {
    let Some(net) = &inst.network else { return true };
    let bus = inst.unit_bus_indices();
    for (l, line) in net.lines.iter().enumerate() {
        let sf = &net.shift_factors[l];
        for t in 0..inst.horizon {
            let mut flow: f64 = s.units.iter().enumerate().map(|(g, u)| sf[bus[g]] * u.p[t]).sum();
            flow -= (0..inst.buses.len()).map(|n| sf[n] * inst.demand[t][n]).sum::<f64>();
            if flow.abs() > line.limit * (1.0 + 1e-9) + 1e-9 {
                return false;
            }
        }
    }
    true
}
