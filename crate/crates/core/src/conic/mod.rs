//! Deterministic interior-point solver for linear objectives over products
//! of nonnegative orthants and second-order cones.

pub mod ldl;
pub mod cones;
pub mod ipm;
pub mod model;
pub mod sparse;

pub use cones::Cone;
pub use ipm::{solve, ConicSolution, Residuals, SolverSettings, Status};
pub use model::{standardize, ConicProgram, GroupId, LinExpr, ModelBuild, RowMap, Sense, Var};

use crate::error::{Error, Result};

/// Duals of the rows of `group`, in insertion order.
///
/// Equality and `>=` rows report the marginal cost of raising their right-hand
/// side. `<=` rows report the marginal saving, so a binding `<=` row has a
/// nonnegative dual at nonnegative marginal costs. Rows whose terms were all
/// fixed report zero.
pub fn dual_of(sol: &ConicSolution, prog: &ConicProgram, group: &str) -> Result<Vec<f64>> {
    if sol.status != Status::Optimal {
        return Err(Error::Solver { status: sol.status });
    }
    let rows = prog.group_rows(group).ok_or_else(|| Error::UnknownGroup(group.to_string()))?;
    Ok(rows
        .iter()
        .map(|r| match *r {
            RowMap::Std { row, sense: Sense::Le } => -sol.y[row],
            RowMap::Std { row, .. } => sol.y[row],
            RowMap::Trivial => 0.0,
        })
        .collect())
}

/// Standardizes and solves in one step.
pub fn solve_build(build: &ModelBuild, settings: &SolverSettings) -> Result<(ConicProgram, ConicSolution)> {
    let prog = standardize(build)?;
    let sol = solve(&prog, settings);
    Ok((prog, sol))
}
