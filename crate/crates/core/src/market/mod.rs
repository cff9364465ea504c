//! Market clearing around the pricing model: commitment, LMPs, uplifts,
//! qualified-unit pricing, the single-period baseline and price anchoring.

mod anchor;
mod report;
mod single_period;
mod uced;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use anchor::price_anchor;
pub use report::{comparison_table, prices_csv, report_table};
pub use single_period::{single_period_prices, StartupAllocation};
pub use uced::{solve_uced, UcedOptions, UcedResult, UcedStatus};

use crate::conic::SolverSettings;
use crate::error::{Error, Result};
use crate::hull::{solve_chp, solve_fixed_commitment, BuildOptions, HullMode, Prices};
use crate::instance::{Instance, UnitSpec};
use crate::oracle::{self, dual_function_q, extended_chp, ProfitMax};
use crate::schedule::Schedule;

/// Pricing schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PricingMode {
    /// Hull prices from the exact hull of units without ramp limits.
    Exact,
    /// Hull prices with ramp rows added to the hull description.
    Achp1,
    /// Hull prices from the extended formulation.
    Extended,
    /// Period-by-period hull prices.
    SinglePeriod,
}

impl PricingMode {
    pub fn label(self) -> &'static str {
        match self {
            PricingMode::Exact => "CHP",
            PricingMode::Achp1 => "aCHP1",
            PricingMode::Extended => "CHP-ext",
            PricingMode::SinglePeriod => "single-period",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitUplift {
    pub id: String,
    pub qualified: bool,
    /// `w_g`, the best profit at the prices.
    pub w: f64,
    pub realized_profit: f64,
    /// `w_g - realized profit`; `None` for units not eligible for payment.
    pub uplift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub total_uplift: f64,
    pub v_d: f64,
    /// `q(prices)`.
    pub dual_obj: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceReport {
    pub scheme: String,
    pub buses: Vec<String>,
    /// `prices[t][bus]`
    pub prices: Vec<Vec<f64>>,
    pub reserve_prices: Option<Vec<f64>>,
    pub per_unit: Vec<UnitUplift>,
    pub totals: Totals,
}

/// Uplifts at `prices` and the dual function value there.
#[derive(Debug, Clone, PartialEq)]
pub struct UpliftSummary {
    pub per_unit: Vec<UnitUplift>,
    pub total_uplift: f64,
    pub dual_obj: f64,
}

/// Best profit of one unit at its own prices.
pub fn unit_profit_max(unit: &UnitSpec, horizon: usize, pi: &[f64], rho: Option<&[f64]>, settings: &SolverSettings) -> Result<ProfitMax> {
    oracle::unit_profit_max(unit, horizon, pi, rho, settings)
}

/// Realized profit of a unit's schedule at `prices`.
fn realized_profit(inst: &Instance, g: usize, bus: usize, prices: &Prices, sched: &Schedule) -> f64 {
    let s = &sched.units[g];
    let mut revenue: f64 = (0..inst.horizon).map(|t| prices.at(t, bus) * s.p[t]).sum();
    if let (Some(rho), Some(r)) = (&prices.reserve, &s.r) {
        revenue += rho.iter().zip(r).map(|(a, b)| a * b).sum::<f64>();
    }
    revenue - s.cost(&inst.units[g])
}

/// Lost opportunity cost `U_g = w_g - realized profit` of every unit in
/// `qualified` (every unit when `None`).
pub fn uplift(
    inst: &Instance,
    prices: &Prices,
    sched: &Schedule,
    qualified: Option<&BTreeSet<String>>,
    settings: &SolverSettings,
) -> Result<UpliftSummary> {
    let point = dual_function_q(inst, prices, |_| true, settings)?;
    let buses = inst.unit_bus_indices();
    let mut per_unit = Vec::with_capacity(inst.units.len());
    let mut total = 0.0;
    for (g, unit) in inst.units.iter().enumerate() {
        let w = point.responses[g].as_ref().expect("all units evaluated").profit;
        let realized = realized_profit(inst, g, buses[g], prices, sched);
        let eligible = qualified.is_none_or(|q| q.contains(&unit.id));
        let uplift = eligible.then_some(w - realized);
        total += uplift.unwrap_or(0.0);
        per_unit.push(UnitUplift { id: unit.id.clone(), qualified: eligible, w, realized_profit: realized, uplift });
    }
    Ok(UpliftSummary { per_unit, total_uplift: total, dual_obj: point.q })
}

/// Assembles the report of `prices` against the committed schedule.
pub fn price_report(
    scheme: impl Into<String>,
    inst: &Instance,
    prices: &Prices,
    sched: &Schedule,
    qualified: Option<&BTreeSet<String>>,
    settings: &SolverSettings,
) -> Result<PriceReport> {
    let up = uplift(inst, prices, sched, qualified, settings)?;
    let v_d = sched.cost(inst);
    let gap_abs = v_d - up.dual_obj;
    let gap_rel = if v_d.abs() > 0.0 { gap_abs / v_d.abs() } else { 0.0 };
    Ok(PriceReport {
        scheme: scheme.into(),
        buses: inst.buses.clone(),
        prices: prices.energy.clone(),
        reserve_prices: prices.reserve.clone(),
        per_unit: up.per_unit,
        totals: Totals { total_uplift: up.total_uplift, v_d, dual_obj: up.dual_obj, gap_abs, gap_rel },
    })
}

/// Locational marginal prices: duals of the dispatch with the commitment of
/// `sched` held fixed.
pub fn lmp(inst: &Instance, sched: &Schedule, settings: &SolverSettings) -> Result<PriceReport> {
    let x: Vec<Vec<bool>> = sched.units.iter().map(|u| u.x.clone()).collect();
    let fd = solve_fixed_commitment(inst, &x, settings)?
        .ok_or_else(|| Error::Infeasible("the commitment admits no feasible dispatch".into()))?;
    price_report("LMP", inst, &fd.prices, sched, None, settings)
}

/// The instance restricted to its qualified units.
pub fn qualified_instance(inst: &Instance) -> Instance {
    let mut out = inst.clone();
    out.units.retain(|u| inst.qualified.contains(&u.id));
    out
}

/// Prices under `mode`, optionally over the qualified units only.
pub fn hull_prices(inst: &Instance, mode: PricingMode, qualified: bool, sched: &Schedule, settings: &SolverSettings) -> Result<Prices> {
    match mode {
        PricingMode::Exact | PricingMode::Achp1 => {
            let hm = if mode == PricingMode::Exact { HullMode::Exact } else { HullMode::Achp1 };
            Ok(solve_chp(inst, hm, BuildOptions { qualified }, settings)?.prices)
        }
        PricingMode::Extended => {
            let sub;
            let target = if qualified {
                sub = qualified_instance(inst);
                if sub.units.is_empty() {
                    return Err(Error::Model("no units left in the pricing model".into()));
                }
                &sub
            } else {
                inst
            };
            Ok(extended_chp(target, settings)?.prices)
        }
        PricingMode::SinglePeriod => single_period_prices(inst, sched, StartupAllocation::Uniform, settings),
    }
}

/// Hull pricing report of `mode` for the committed schedule. Uplifts are
/// paid to qualified units only when `qualified` is set.
pub fn chp_report(inst: &Instance, mode: PricingMode, qualified: bool, sched: &Schedule, settings: &SolverSettings) -> Result<PriceReport> {
    let prices = hull_prices(inst, mode, qualified, sched, settings)?;
    let label = if qualified { format!("{}q", mode.label()) } else { mode.label().to_string() };
    price_report(label, inst, &prices, sched, qualified.then_some(&inst.qualified), settings)
}

/// Single-period baseline report.
pub fn single_period_chp(inst: &Instance, sched: &Schedule, settings: &SolverSettings) -> Result<PriceReport> {
    chp_report(inst, PricingMode::SinglePeriod, false, sched, settings)
}
