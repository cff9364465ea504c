//! Exact small-scale oracles used to audit the pricing model.

pub mod dispatch;
pub mod dual;
pub mod extended;
pub mod profit;
pub mod schedules;
pub mod subgradient;
pub mod uced;
pub mod vertex;

pub use dispatch::{economic_dispatch, Offer};
pub use dual::{dual_function_q, dual_value, DualPoint};
pub use extended::{extended_chp, ExtendedSolution};
pub use profit::{best_commitment, fixed_schedule_profit, period_best, unit_profit_max, ProfitMax};
pub use schedules::{enumerate_schedules, enumerate_schedules_capped, CommitmentSchedule, ENUMERATION_CAP};
pub use uced::{brute_force_uced, UcedSolution};
pub use vertex::{negative_control_check, vertex_integrality_check, VertexReport, Witness, VERTEX_CAP};
pub use subgradient::{subgradient_solve, uniform_prices, Iterate, StepRule, SubgradientRun};
