//! Integral commitment and dispatch decisions.

use serde::{Deserialize, Serialize};

use crate::hull::{hull_constraints, HullMode, Sym};
use crate::instance::{Instance, UnitSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSchedule {
    pub x: Vec<bool>,
    /// `u[t]` is the start-up in period `t`; `u[0]` can only be set when the
    /// unit has an initial status.
    pub u: Vec<bool>,
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
}

impl UnitSchedule {
    pub fn x_f64(&self) -> Vec<f64> {
        self.x.iter().map(|&b| b as u8 as f64).collect()
    }

    pub fn u_f64(&self) -> Vec<f64> {
        self.u.iter().map(|&b| b as u8 as f64).collect()
    }

    /// Total cost under `unit`'s offer.
    pub fn cost(&self, unit: &UnitSpec) -> f64 {
        (0..self.x.len())
            .map(|t| {
                let on = if self.x[t] { unit.period_cost(self.p[t]) } else { 0.0 };
                on + if self.u[t] { unit.startup_cost } else { 0.0 }
            })
            .sum()
    }
}

/// Start-up vector implied by a commitment vector.
pub fn startups(unit: &UnitSpec, x: &[bool]) -> Vec<bool> {
    (0..x.len())
        .map(|t| {
            if t == 0 {
                unit.initial.is_some_and(|h| x[0] && h.x_hist(0) < 0.5)
            } else {
                x[t] && !x[t - 1]
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub units: Vec<UnitSchedule>,
}

impl Schedule {
    pub fn cost(&self, inst: &Instance) -> f64 {
        self.units.iter().zip(&inst.units).map(|(s, u)| s.cost(u)).sum()
    }

    /// Checks every private unit constraint and the energy balance within
    /// `tol`; returns a description of the first violation.
    pub fn check(&self, inst: &Instance, tol: f64) -> Result<(), String> {
        if self.units.len() != inst.units.len() {
            return Err("schedule and instance disagree on the number of units".into());
        }
        for (g, (s, unit)) in self.units.iter().zip(&inst.units).enumerate() {
            let mode = if unit.has_ramping() { HullMode::Achp1 } else { HullMode::Exact };
            let with_r = inst.reserve.is_some();
            let sys = hull_constraints(unit, inst.horizon, mode, with_r).map_err(|e| e.to_string())?;
            let value = |sym: Sym| match sym {
                Sym::P(t) => s.p[t],
                Sym::X(t) => s.x[t] as u8 as f64,
                Sym::U(t) => s.u[t] as u8 as f64,
                Sym::R(t) => s.r.as_ref().map_or(0.0, |r| r[t]),
                Sym::S(_) => 0.0,
            };
            for r in &sys.rows {
                if !r.holds(value, tol) {
                    return Err(format!("unit {} violates a {:?} row in period {}", unit.id, r.kind, r.t + 1));
                }
            }
            for &(sym, lo, hi) in &sys.bounds {
                let v = value(sym);
                if v < lo - tol || v > hi + tol {
                    return Err(format!("unit {} violates the bound on {sym:?}", g));
                }
            }
        }
        for t in 0..inst.horizon {
            let total: f64 = self.units.iter().map(|s| s.p[t]).sum();
            let d = inst.total_demand(t);
            if (total - d).abs() > tol * (1.0 + d) {
                return Err(format!("period {} generates {total} against demand {d}", t + 1));
            }
        }
        Ok(())
    }
}
