//! Exact price-taking profit maximization of a single unit over its private
//! feasible set.

use crate::conic::{self, LinExpr, ModelBuild, SolverSettings};
use crate::error::Result;
use crate::hull::{add_unit_system, envelope_epigraph, hull_constraints, require_optimal, HullMode, Sym};
use crate::instance::UnitSpec;
use crate::schedule::{startups, UnitSchedule};

use super::schedules::enumerate_schedules;

/// Best response of a unit to prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfitMax {
    /// `w_g`: maximum of revenue minus cost.
    pub profit: f64,
    pub schedule: UnitSchedule,
}

/// Best committed output, reserve and profit (no-load cost included) in one
/// period at energy price `pi` and reserve price `rho`.
pub fn period_best(unit: &UnitSpec, pi: f64, rho: Option<f64>) -> (f64, f64, f64) {
    let c = &unit.cost;
    let value = |p: f64, r: f64| pi * p + rho.unwrap_or(0.0) * r - c.eval(p) - unit.no_load_cost;
    match (unit.reserve, rho) {
        (Some(res), Some(rho)) => {
            if rho > 0.0 {
                // r = min(r_max, p_max - p)
                let split = unit.p_max - res.max;
                let pa = c.best_response(pi, unit.p_min, split);
                let va = value(pa, res.max);
                let pb = c.best_response(pi - rho, split, unit.p_max - res.min);
                let vb = value(pb, unit.p_max - pb);
                if vb > va + 1e-12 * (1.0 + va.abs()) {
                    (pb, unit.p_max - pb, vb)
                } else {
                    (pa, res.max, va)
                }
            } else {
                let p = c.best_response(pi, unit.p_min, unit.p_max - res.min);
                (p, res.min, value(p, res.min))
            }
        }
        _ => {
            let p = c.best_response(pi, unit.p_min, unit.p_max);
            (p, 0.0, value(p, 0.0))
        }
    }
}

/// Maximizes `sum_t pi_t p_t + rho_t r_t - C(p, x, u)` over the unit's
/// feasible set. Units without ramp limits use a dynamic program over
/// (state, run length); ramp-limited units enumerate schedules and solve the
/// dispatch of each one that could beat the incumbent.
pub fn unit_profit_max(unit: &UnitSpec, horizon: usize, pi: &[f64], rho: Option<&[f64]>, settings: &SolverSettings) -> Result<ProfitMax> {
    let best: Vec<(f64, f64, f64)> = (0..horizon).map(|t| period_best(unit, pi[t], rho.map(|r| r[t]))).collect();
    let with_r = rho.is_some() && unit.reserve.is_some();
    if !unit.has_ramping() {
        return Ok(profit_dp(unit, horizon, &best, with_r));
    }
    let mut incumbent: Option<ProfitMax> = None;
    for s in enumerate_schedules(unit.min_up, unit.min_down, horizon, unit.initial)? {
        let upper: f64 =
            (0..horizon).map(|t| if s.x[t] { best[t].2 } else { 0.0 } - if s.u[t] { unit.startup_cost } else { 0.0 }).sum();
        if incumbent.as_ref().is_some_and(|b| upper <= b.profit + 1e-9 * (1.0 + b.profit.abs())) {
            continue;
        }
        let greedy = UnitSchedule {
            x: s.x.clone(),
            u: s.u.clone(),
            p: (0..horizon).map(|t| if s.x[t] { best[t].0 } else { 0.0 }).collect(),
            r: with_r.then(|| (0..horizon).map(|t| if s.x[t] { best[t].1 } else { 0.0 }).collect()),
        };
        let candidate = if ramps_hold(unit, horizon, &greedy) {
            Some(ProfitMax { profit: upper, schedule: greedy })
        } else {
            fixed_schedule_profit(unit, horizon, &s.x, pi, rho, settings)?
        };
        if let Some(c) = candidate {
            if incumbent.as_ref().is_none_or(|b| c.profit > b.profit + 1e-9 * (1.0 + b.profit.abs())) {
                incumbent = Some(c);
            }
        }
    }
    // the all-off schedule is always feasible unless history forces the unit on
    Ok(incumbent.expect("a unit always has at least one feasible schedule"))
}

fn ramps_hold(unit: &UnitSpec, horizon: usize, s: &UnitSchedule) -> bool {
    let sys = match hull_constraints(unit, horizon, HullMode::Achp1, false) {
        Ok(sys) => sys,
        Err(_) => return false,
    };
    let value = |sym: Sym| match sym {
        Sym::P(t) => s.p[t],
        Sym::X(t) => s.x[t] as u8 as f64,
        Sym::U(t) => s.u[t] as u8 as f64,
        _ => 0.0,
    };
    sys.rows.iter().all(|r| r.holds(value, 1e-9))
}

/// Profit-maximizing dispatch of a fixed commitment, `None` when the
/// commitment admits no dispatch.
pub fn fixed_schedule_profit(
    unit: &UnitSpec,
    horizon: usize,
    x: &[bool],
    pi: &[f64],
    rho: Option<&[f64]>,
    settings: &SolverSettings,
) -> Result<Option<ProfitMax>> {
    let u = startups(unit, x);
    let with_r = rho.is_some() && unit.reserve.is_some();
    let mode = if unit.has_ramping() { HullMode::Achp1 } else { HullMode::Exact };
    let mut sys = hull_constraints(unit, horizon, mode, with_r)?;
    // fixing variables through bounds; the rest of the hull rows then act
    // on the fixed commitment
    for b in sys.bounds.iter_mut() {
        match b.0 {
            Sym::X(t) => {
                let v = x[t] as u8 as f64;
                if v < b.1 || v > b.2 {
                    return Ok(None);
                }
                (b.1, b.2) = (v, v);
            }
            Sym::U(t) => {
                let v = u[t] as u8 as f64;
                if v < b.1 || v > b.2 {
                    return Ok(None);
                }
                (b.1, b.2) = (v, v);
            }
            _ => {}
        }
    }
    sys.extend(envelope_epigraph(unit, horizon));
    let mut build = ModelBuild::new();
    let vars = add_unit_system(&mut build, unit, 0, horizon, &sys);
    let mut revenue = LinExpr::new();
    for t in 0..horizon {
        revenue.add_term(vars.p[t], -pi[t]);
        if let (Some(r), Some(rho)) = (&vars.r, rho) {
            revenue.add_term(r[t], -rho[t]);
        }
    }
    build.add_objective(&revenue);
    let (prog, sol) = conic::solve_build(&build, settings)?;
    if sol.status == conic::Status::Infeasible {
        return Ok(None);
    }
    require_optimal(&sol)?;
    let vals = prog.values(&sol.x);
    let p: Vec<f64> = (0..horizon).map(|t| if x[t] { vals[vars.p[t].0] } else { 0.0 }).collect();
    let r = vars.r.as_ref().map(|r| r.iter().map(|v| vals[v.0]).collect());
    Ok(Some(ProfitMax { profit: -sol.objective, schedule: UnitSchedule { x: x.to_vec(), u, p, r } }))
}

#[derive(Clone, Copy, PartialEq)]
struct State {
    on: bool,
    len: usize,
    free: bool,
}

/// Feasible commitment maximizing `sum_t gains[t] x_t`, start-up costs
/// ignored.
pub fn best_commitment(unit: &UnitSpec, gains: &[f64]) -> Vec<bool> {
    let free = UnitSpec { startup_cost: 0.0, ..unit.clone() };
    let best: Vec<(f64, f64, f64)> = gains.iter().map(|&g| (0.0, 0.0, g)).collect();
    profit_dp(&free, gains.len(), &best, false).schedule.x
}

fn profit_dp(unit: &UnitSpec, horizon: usize, best: &[(f64, f64, f64)], with_r: bool) -> ProfitMax {
    let cap = unit.min_up.max(unit.min_down);
    let idx = |s: State| (s.on as usize) * 2 * (cap + 1) + s.len.min(cap) * 2 + s.free as usize;
    let n_states = 4 * (cap + 1);
    let neg = f64::NEG_INFINITY;
    let mut value = vec![neg; n_states];
    let mut states: Vec<Option<State>> = vec![None; n_states];
    // back[t][state] = previous state index
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(horizon);
    let mut first_back = vec![usize::MAX; n_states];

    let gain = |t: usize, on: bool, start: bool| -> f64 {
        let mut g = if on { best[t].2 } else { 0.0 };
        if start {
            g -= unit.startup_cost;
        }
        g
    };

    match unit.initial {
        Some(h) => {
            let s0 = State { on: h.on, len: (h.duration as usize).min(cap), free: false };
            // expand period 0 from the history state
            for (next, start) in successors(s0, unit) {
                let i = idx(next);
                let v = gain(0, next.on, start);
                if v > value[i] {
                    value[i] = v;
                    states[i] = Some(next);
                    first_back[i] = 0;
                }
            }
        }
        None => {
            for on in [false, true] {
                let s = State { on, len: 1, free: true };
                let i = idx(s);
                value[i] = gain(0, on, false);
                states[i] = Some(s);
            }
        }
    }
    back.push(first_back);

    for t in 1..horizon {
        let mut nv = vec![neg; n_states];
        let mut ns: Vec<Option<State>> = vec![None; n_states];
        let mut nb = vec![usize::MAX; n_states];
        for i in 0..n_states {
            let Some(s) = states[i] else { continue };
            if value[i] == neg {
                continue;
            }
            for (next, start) in successors(s, unit) {
                let j = idx(next);
                let v = value[i] + gain(t, next.on, start);
                if v > nv[j] {
                    nv[j] = v;
                    ns[j] = Some(next);
                    nb[j] = i;
                }
            }
        }
        value = nv;
        states = ns;
        back.push(nb);
    }

    let mut end = 0;
    for i in 0..n_states {
        if value[i] > value[end] || value[end] == neg {
            end = i;
        }
    }
    let profit = value[end];
    // recover the commitment path
    let mut x = vec![false; horizon];
    let mut i = end;
    for t in (0..horizon).rev() {
        x[t] = i >= 2 * (cap + 1);
        i = back[t][i];
    }
    let u = startups(unit, &x);
    let p = (0..horizon).map(|t| if x[t] { best[t].0 } else { 0.0 }).collect();
    let r = with_r.then(|| (0..horizon).map(|t| if x[t] { best[t].1 } else { 0.0 }).collect());
    ProfitMax { profit, schedule: UnitSchedule { x, u, p, r } }
}

/// Successor states with a start-up flag.
fn successors(s: State, unit: &UnitSpec) -> impl Iterator<Item = (State, bool)> {
    let cap = unit.min_up.max(unit.min_down);
    let stay = (State { on: s.on, len: (s.len + 1).min(cap), free: s.free }, false);
    let min_len = if s.on { unit.min_up } else { unit.min_down };
    let switch = (s.free || s.len >= min_len).then_some((State { on: !s.on, len: 1, free: false }, !s.on));
    std::iter::once(stay).chain(switch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CostCurve, InitialStatus};

    fn ex1_unit2() -> UnitSpec {
        UnitSpec {
            id: "2".into(),
            bus: "1".into(),
            p_min: 50.0,
            p_max: 50.0,
            min_up: 1,
            min_down: 1,
            ramp: None,
            startup_ramp: None,
            startup_cost: 100.0,
            no_load_cost: 0.0,
            cost: CostCurve::Quadratic { a: 0.0, b: 10.0 },
            reserve: None,
            initial: Some(InitialStatus { on: false, duration: 100, p: None }),
        }
    }

    #[test]
    fn single_period_profits() {
        let s = SolverSettings::default();
        let u = ex1_unit2();
        let w = unit_profit_max(&u, 1, &[50.0], None, &s).unwrap();
        assert!((w.profit - 1900.0).abs() < 1e-9);
        assert_eq!(w.schedule.x, vec![true]);
        let w = unit_profit_max(&u, 1, &[12.0], None, &s).unwrap();
        assert!(w.profit.abs() < 1e-9);
        let w = unit_profit_max(&u, 1, &[0.0], None, &s).unwrap();
        assert_eq!((w.profit, w.schedule.x[0]), (0.0, false));
    }

    #[test]
    fn min_up_time_binds_in_dp() {
        // profitable only in period 0; min up 2 forces a losing second period
        let mut u = ex1_unit2();
        u.min_up = 2;
        u.startup_cost = 0.0;
        u.initial = None;
        let s = SolverSettings::default();
        let w = unit_profit_max(&u, 3, &[20.0, 0.0, 0.0], None, &s).unwrap();
        // free first run: on in period 0 only
        assert!((w.profit - 500.0).abs() < 1e-9);
        u.initial = Some(InitialStatus { on: false, duration: 9, p: None });
        let w = unit_profit_max(&u, 3, &[20.0, 0.0, 0.0], None, &s).unwrap();
        assert!((w.profit - 0.0).abs() < 1e-9);
        let w = unit_profit_max(&u, 3, &[20.0, 8.0, 0.0], None, &s).unwrap();
        assert!((w.profit - 400.0).abs() < 1e-9, "{}", w.profit);
    }

    #[test]
    fn ramping_unit_matches_fixed_dispatch() {
        let mut u = ex1_unit2();
        u.p_min = 0.0;
        u.p_max = 100.0;
        u.startup_cost = 0.0;
        u.ramp = Some(30.0);
        let s = SolverSettings::default();
        // needs three periods to reach full output
        let w = unit_profit_max(&u, 3, &[11.0, 11.0, 100.0], None, &s).unwrap();
        // p = (30, 60, 90): 30 + 60 + 90 * 90
        assert!((w.profit - (30.0 + 60.0 + 90.0 * 90.0)).abs() < 1e-5, "{}", w.profit);
    }
}
