//! Disjunctive extended formulation: the exact convex hull of each unit's
//! feasible set as a convex combination of its enumerated schedules.

use crate::conic::{self, LinExpr, ModelBuild, Sense, SolverSettings, Var};
use crate::error::{Error, Result};
use crate::hull::{
    add_system_rows, chp_prices, envelope_epigraph, hull_constraints, require_optimal, HullMode, Prices, Sym, UnitOutput,
};
use crate::instance::{Instance, UnitSpec};

use super::schedules::{enumerate_schedules, CommitmentSchedule};

/// Solved extended formulation.
#[derive(Debug, Clone)]
pub struct ExtendedSolution {
    pub objective: f64,
    pub prices: Prices,
    /// Schedule weights per unit, in enumeration order.
    pub weights: Vec<Vec<f64>>,
    pub iterations: usize,
}

/// Builds and solves the extended formulation over all units.
///
/// For a schedule `s` with weight `lambda`, every row of the unit's
/// description is homogenized: commitment symbols become `lambda x^s`,
/// `lambda u^s`, right-hand sides are multiplied by `lambda`, and dispatch
/// symbols become the schedule's own block, absent in off periods.
pub fn extended_chp(inst: &Instance, settings: &SolverSettings) -> Result<ExtendedSolution> {
    let t_len = inst.horizon;
    let with_reserve = inst.reserve.is_some();
    let mut build = ModelBuild::new();
    let mut outputs = Vec::with_capacity(inst.units.len());
    let mut lambdas: Vec<Vec<Var>> = Vec::with_capacity(inst.units.len());
    for (g, unit) in inst.units.iter().enumerate() {
        let schedules = enumerate_schedules(unit.min_up, unit.min_down, t_len, unit.initial)?;
        let mut sys = hull_constraints(unit, t_len, HullMode::Achp1, with_reserve)?;
        sys.extend(envelope_epigraph(unit, t_len));
        let mut p_sum: Vec<LinExpr> = vec![LinExpr::new(); t_len];
        let mut r_sum: Option<Vec<LinExpr>> = (with_reserve && unit.reserve.is_some()).then(|| vec![LinExpr::new(); t_len]);
        let mut weights = Vec::with_capacity(schedules.len());
        let convexity = build.add_group(format!("convexity[{}]", unit.id));
        let mut sum = LinExpr::new();
        for (k, s) in schedules.iter().enumerate() {
            if !respects_bounds(&sys.bounds, s) {
                continue;
            }
            let lambda = build.add_var(format!("lambda[{g},{k}]"), 0.0, 1.0);
            sum.add_term(lambda, 1.0);
            weights.push(lambda);
            let block = add_schedule_block(&mut build, unit, g, k, s, lambda, &sys);
            for t in 0..t_len {
                if let Some(p) = block.p[t] {
                    p_sum[t].add_term(p, 1.0);
                }
                if let (Some(acc), Some(r)) = (r_sum.as_mut(), block.r[t]) {
                    acc[t].add_term(r, 1.0);
                }
            }
        }
        if weights.is_empty() {
            return Err(Error::Infeasible(format!("unit {} has no feasible schedule", unit.id)));
        }
        build.add_row(convexity, sum, Sense::Eq, 1.0);
        outputs.push(UnitOutput { unit: g, p: p_sum, r: r_sum });
        lambdas.push(weights);
    }
    let system = add_system_rows(&mut build, inst, &outputs, true);
    let (prog, sol) = conic::solve_build(&build, settings)?;
    require_optimal(&sol)?;
    let prices = chp_prices(&sol, &prog, &system, inst)?;
    let weights = lambdas.iter().map(|ls| ls.iter().map(|&v| prog.value(&sol.x, v)).collect()).collect();
    Ok(ExtendedSolution { objective: sol.objective, prices, weights, iterations: sol.iterations })
}

fn respects_bounds(bounds: &[(Sym, f64, f64)], s: &CommitmentSchedule) -> bool {
    bounds.iter().all(|&(sym, lo, hi)| {
        let v = match sym {
            Sym::X(t) => s.x[t] as u8 as f64,
            Sym::U(t) => s.u[t] as u8 as f64,
            _ => return true,
        };
        v >= lo && v <= hi
    })
}

struct Block {
    p: Vec<Option<Var>>,
    r: Vec<Option<Var>>,
}

fn add_schedule_block(
    build: &mut ModelBuild,
    unit: &UnitSpec,
    g: usize,
    k: usize,
    s: &CommitmentSchedule,
    lambda: Var,
    sys: &crate::hull::UnitSystem,
) -> Block {
    let t_len = s.x.len();
    let bound = |sym: Sym| sys.bounds.iter().find(|b| b.0 == sym).map_or((0.0, f64::INFINITY), |b| (b.1, b.2));
    let mut p = vec![None; t_len];
    let mut r = vec![None; t_len];
    let mut e = vec![None; t_len];
    for t in 0..t_len {
        if !s.x[t] {
            continue;
        }
        let (lo, hi) = bound(Sym::P(t));
        p[t] = Some(build.add_var(format!("p[{g},{k},{t}]"), lo, hi));
        if sys.bounds.iter().any(|b| b.0 == Sym::R(t)) {
            let (lo, hi) = bound(Sym::R(t));
            r[t] = Some(build.add_var(format!("r[{g},{k},{t}]"), lo, hi));
        }
        if sys.bounds.iter().any(|b| b.0 == Sym::S(t)) {
            let (lo, hi) = bound(Sym::S(t));
            e[t] = Some(build.add_var(format!("s[{g},{k},{t}]"), lo, hi));
        }
    }
    // (dispatch expression, coefficient of lambda)
    let lower = |terms: &[(Sym, f64)], constant: f64| -> (LinExpr, f64) {
        let mut expr = LinExpr::new();
        let mut lam = constant;
        for &(sym, c) in terms {
            match sym {
                Sym::X(t) => lam += c * s.x[t] as u8 as f64,
                Sym::U(t) => lam += c * s.u[t] as u8 as f64,
                Sym::P(t) => {
                    if let Some(v) = p[t] {
                        expr.add_term(v, c);
                    }
                }
                Sym::R(t) => {
                    if let Some(v) = r[t] {
                        expr.add_term(v, c);
                    }
                }
                Sym::S(t) => {
                    if let Some(v) = e[t] {
                        expr.add_term(v, c);
                    }
                }
            }
        }
        (expr, lam)
    };
    let group = build.group(&format!("unit[{}]", unit.id));
    for row in &sys.rows {
        let (mut expr, lam) = lower(&row.terms, -row.rhs);
        if expr.terms.is_empty() {
            // commitment-only rows hold for an enumerated schedule
            debug_assert!(match row.sense {
                Sense::Le => lam <= 1e-9,
                Sense::Ge => lam >= -1e-9,
                Sense::Eq => lam.abs() <= 1e-9,
            });
            continue;
        }
        expr.add_term(lambda, lam);
        build.add_row(group, expr, row.sense, 0.0);
    }
    for cone in &sys.cones {
        let members: Vec<LinExpr> = cone
            .iter()
            .map(|(terms, k)| {
                let (mut expr, lam) = lower(terms, *k);
                expr.add_term(lambda, lam);
                expr
            })
            .collect();
        // cones of off periods collapse to the origin
        if members.iter().any(|m| m.terms.iter().any(|&(v, c)| v != lambda && c != 0.0)) {
            build.add_soc(members);
        }
    }
    let (mut obj, lam) = lower(&sys.objective, 0.0);
    obj.add_term(lambda, lam);
    build.add_objective(&obj);
    Block { p, r }
}
