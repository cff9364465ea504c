//! Projected subgradient ascent on the Lagrangian dual, the classical
//! baseline for computing hull prices.

use serde::{Deserialize, Serialize};

use crate::conic::SolverSettings;
use crate::error::Result;
use crate::hull::Prices;
use crate::instance::Instance;

use super::dual::dual_function_q;

/// Polyak-type step `alpha_k = mu_k (UB - q_k) / |g_k|^2` with `mu_k =
/// mu0 * decay^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRule {
    /// Upper bound on the dual optimum, for example `v(d)`.
    pub upper_bound: f64,
    pub mu0: f64,
    pub decay: f64,
}

impl StepRule {
    pub fn new(upper_bound: f64) -> Self {
        StepRule { upper_bound, mu0: 1.0, decay: 0.99 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub q: f64,
    /// Uniform energy prices.
    pub lambda: Vec<f64>,
    pub reserve: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgradientRun {
    pub best_q: f64,
    pub best: Prices,
    pub best_iteration: usize,
    pub trajectory: Vec<Iterate>,
}

/// Prices with the given uniform energy component, no congestion and the
/// given reserve prices.
pub fn uniform_prices(inst: &Instance, lambda: &[f64], reserve: Option<&[f64]>) -> Prices {
    let nb = inst.buses.len().max(1);
    let nl = inst.network.as_ref().map_or(0, |n| n.lines.len());
    Prices {
        energy: lambda.iter().map(|&l| vec![l; nb]).collect(),
        lambda: lambda.to_vec(),
        mu_plus: vec![vec![0.0; inst.horizon]; nl],
        mu_minus: vec![vec![0.0; inst.horizon]; nl],
        reserve: reserve.map(<[f64]>::to_vec),
    }
}

/// Runs `iters` ascent steps from zero prices over uniform energy prices
/// and, when the instance has a reserve requirement, nonnegative reserve
/// prices. Line limits are not dualized, so every iterate prices the
/// uncongested relaxation and its `q` is a valid lower bound.
pub fn subgradient_solve(inst: &Instance, iters: usize, rule: StepRule, settings: &SolverSettings) -> Result<SubgradientRun> {
    let t_len = inst.horizon;
    let mut lambda = vec![0.0; t_len];
    let mut rho = inst.reserve.as_ref().map(|_| vec![0.0; t_len]);
    let mut trajectory = Vec::with_capacity(iters);
    let mut best: Option<(f64, Prices, usize)> = None;
    let mut mu = rule.mu0;
    for k in 0..iters.max(1) {
        let prices = uniform_prices(inst, &lambda, rho.as_deref());
        let point = dual_function_q(inst, &prices, |_| true, settings)?;
        trajectory.push(Iterate { q: point.q, lambda: lambda.clone(), reserve: rho.clone() });
        if best.as_ref().is_none_or(|b| point.q > b.0) {
            best = Some((point.q, prices, k));
        }
        let g_res: Option<Vec<f64>> = inst.reserve.as_ref().map(|req| {
            (0..t_len)
                .map(|t| {
                    let offered: f64 = point.responses.iter().flatten().filter_map(|w| w.schedule.r.as_ref()).map(|r| r[t]).sum();
                    req[t] - offered
                })
                .collect()
        });
        let norm2: f64 = point.balance_gap.iter().chain(g_res.iter().flatten()).map(|g| g * g).sum();
        if norm2 <= 1e-18 {
            break;
        }
        let alpha = mu * (rule.upper_bound - point.q).max(0.0) / norm2;
        if alpha == 0.0 {
            break;
        }
        for t in 0..t_len {
            lambda[t] += alpha * point.balance_gap[t];
        }
        if let (Some(rho), Some(g)) = (rho.as_mut(), &g_res) {
            for t in 0..t_len {
                rho[t] = (rho[t] + alpha * g[t]).max(0.0);
            }
        }
        mu *= rule.decay;
    }
    let (best_q, best, best_iteration) = best.expect("at least one iterate");
    Ok(SubgradientRun { best_q, best, best_iteration, trajectory })
}
