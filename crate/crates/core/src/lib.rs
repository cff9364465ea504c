//! Convex hull pricing for multi-period unit commitment.
//!
//! The crate builds the primal convex-hull pricing model (per-unit convex
//! hulls of the commitment sets, convex envelopes of the cost functions and
//! the system coupling rows), solves it with an in-repo conic interior-point
//! solver, and reads the prices from the balance duals. Exact small-scale
//! oracles and the usual market calculations (UCED, LMP, uplift) are provided
//! to audit the prices.

pub mod cli;
pub mod conic;
pub mod error;
pub mod hull;
pub mod instance;
pub mod market;
pub mod oracle;
pub mod schedule;

pub use error::{Error, Result};
