//! The Lagrangian dual function of the coupling rows.

use rayon::prelude::*;

use crate::conic::SolverSettings;
use crate::error::Result;
use crate::hull::Prices;
use crate::instance::Instance;

use super::profit::{unit_profit_max, ProfitMax};

/// The dual function at one price point.
#[derive(Debug, Clone)]
pub struct DualPoint {
    pub q: f64,
    /// Best responses, one per evaluated unit (`None` for skipped units).
    pub responses: Vec<Option<ProfitMax>>,
    /// Supergradient with respect to the uniform energy prices:
    /// `d_t - sum_g p_gt`.
    pub balance_gap: Vec<f64>,
}

/// Evaluates `q(prices) = -sum_g w_g + sum_{t,n} pi_tn d_tn + sum_t rho_t R_t
/// - sum_{l,t} f_l (mu+ + mu-)` over the units selected by `include`.
///
/// Anchored periods contribute the minimal cost of their balancing source
/// and sink, and congested anchored lines contribute no limit term since
/// their price is already fixed in the objective.
pub fn dual_function_q(inst: &Instance, prices: &Prices, include: impl Fn(usize) -> bool + Sync, settings: &SolverSettings) -> Result<DualPoint> {
    let t_len = inst.horizon;
    let buses = inst.unit_bus_indices();
    let responses: Vec<Option<ProfitMax>> = inst
        .units
        .par_iter()
        .enumerate()
        .map(|(g, unit)| {
            if !include(g) {
                return Ok(None);
            }
            let pi: Vec<f64> = (0..t_len).map(|t| prices.at(t, buses[g])).collect();
            unit_profit_max(unit, t_len, &pi, prices.reserve.as_deref(), settings).map(Some)
        })
        .collect::<Result<_>>()?;

    let mut q = -responses.iter().flatten().map(|w| w.profit).sum::<f64>();
    for t in 0..t_len {
        for (n, d) in inst.demand[t].iter().enumerate() {
            q += prices.at(t, n) * d;
        }
    }
    if let (Some(rho), Some(req)) = (&prices.reserve, &inst.reserve) {
        q += rho.iter().zip(req).map(|(a, b)| a * b).sum::<f64>();
    }
    if let Some(net) = &inst.network {
        for (l, line) in net.lines.iter().enumerate() {
            for t in 0..t_len {
                let anchored = inst
                    .anchors
                    .iter()
                    .any(|a| a.period == t && a.congested_line_duals.iter().any(|(id, _)| *id == line.id));
                if !anchored {
                    q -= line.limit * (prices.mu_plus[l][t] + prices.mu_minus[l][t]);
                }
            }
        }
    }
    let cap = 10.0 * inst.total_demand_vec().iter().sum::<f64>().max(1.0);
    for a in &inst.anchors {
        let slack = prices.at(a.period, 0);
        q += cap * (a.price - slack).min(0.0) + cap * (slack - a.price).min(0.0);
    }

    let balance_gap = (0..t_len)
        .map(|t| inst.total_demand(t) - responses.iter().flatten().map(|w| w.schedule.p[t]).sum::<f64>())
        .collect();
    Ok(DualPoint { q, responses, balance_gap })
}

/// `q` over all units.
pub fn dual_value(inst: &Instance, prices: &Prices, settings: &SolverSettings) -> Result<f64> {
    Ok(dual_function_q(inst, prices, |_| true, settings)?.q)
}
