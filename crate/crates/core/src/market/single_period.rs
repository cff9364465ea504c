//! Time-decoupled hull prices: each period priced on its own.

use serde::{Deserialize, Serialize};

use crate::conic::SolverSettings;
use crate::error::Result;
use crate::hull::{solve_chp, BuildOptions, HullMode, Prices};
use crate::instance::Instance;
use crate::schedule::Schedule;

/// How start-up costs of fast-start units enter the one-period models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartupAllocation {
    /// Each committed period carries `h * starts / committed periods` of the
    /// unit's schedule; a unit never committed carries the full `h`.
    #[default]
    Uniform,
    /// Start-up costs are left out.
    None,
}

/// Per-period prices. Every period is a one-period pricing model whose
/// units keep their dispatch limits, cost curve and reserve offer but lose
/// all intertemporal rows. Fast-start units (one-period minimum up and down
/// times) carry their start-up cost as a no-load surcharge per
/// `allocation`; other units carry none.
pub fn single_period_prices(inst: &Instance, sched: &Schedule, allocation: StartupAllocation, settings: &SolverSettings) -> Result<Prices> {
    let t_len = inst.horizon;
    let surcharge: Vec<f64> = inst
        .units
        .iter()
        .zip(&sched.units)
        .map(|(u, s)| {
            if !u.is_fast_start() || allocation == StartupAllocation::None {
                return 0.0;
            }
            let on = s.x.iter().filter(|&&b| b).count();
            let starts = s.u.iter().filter(|&&b| b).count();
            if on == 0 {
                u.startup_cost
            } else {
                u.startup_cost * starts as f64 / on as f64
            }
        })
        .collect();
    let nl = inst.network.as_ref().map_or(0, |n| n.lines.len());
    let mut out = Prices {
        energy: Vec::with_capacity(t_len),
        lambda: Vec::with_capacity(t_len),
        mu_plus: vec![vec![0.0; t_len]; nl],
        mu_minus: vec![vec![0.0; t_len]; nl],
        reserve: inst.reserve.as_ref().map(|_| Vec::with_capacity(t_len)),
    };
    for t in 0..t_len {
        let mut one = inst.clone();
        one.horizon = 1;
        one.demand = vec![inst.demand[t].clone()];
        one.reserve = inst.reserve.as_ref().map(|r| vec![r[t]]);
        one.anchors.clear();
        for (u, extra) in one.units.iter_mut().zip(&surcharge) {
            u.min_up = 1;
            u.min_down = 1;
            u.ramp = None;
            u.startup_ramp = None;
            u.initial = None;
            u.no_load_cost += extra;
        }
        let p = solve_chp(&one, HullMode::Exact, BuildOptions::default(), settings)?.prices;
        out.energy.push(p.energy[0].clone());
        out.lambda.push(p.lambda[0]);
        for l in 0..nl {
            out.mu_plus[l][t] = p.mu_plus[l][0];
            out.mu_minus[l][t] = p.mu_minus[l][0];
        }
        if let (Some(acc), Some(r)) = (out.reserve.as_mut(), &p.reserve) {
            acc.push(r[0]);
        }
    }
    Ok(out)
}
