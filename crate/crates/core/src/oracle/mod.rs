//! Independent ground truth used to check the analytic pipeline.
//!
//! Nothing here feeds production answers: [`product_form_m0`] solves the
//! no-orbit chain in closed form, [`dense_stationary`] solves the full chain by
//! dense LU, and [`simulate`] runs the call-level dynamics event by event.

mod dense;
mod product_form;
mod sim;

pub use dense::dense_stationary;
pub use product_form::{erlang_b, product_form_m0, LevelDistribution};
pub use sim::{simulate, simulate_traced, Estimate, SimConfig, SimulationResult};
