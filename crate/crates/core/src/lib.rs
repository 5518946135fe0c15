//! Exact stationary analysis of a multi-server cellular cell with guard
//! channels and a finite retrial orbit, plus the capacity-planning searches
//! built on top of it.
//!
//! The pipeline is `ModelParams` → [`generator::build_generator`] →
//! [`solver::solve_stationary`] → [`measures`]. [`measures::evaluate`] runs
//! all three steps.
//!
//! ```
//! use retrialcap::{evaluate, ModelParams};
//!
//! let params = ModelParams::with_reference_rates(100, 3, 0);
//! let pm = evaluate(&params).unwrap();
//! assert!((pm.p_b - 0.012528).abs() < 5e-6);
//! assert!((pm.p_d - 0.000504).abs() < 5e-6);
//! ```

pub mod config;
pub mod error;
pub mod exec;
pub mod generator;
pub mod measures;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod output;
pub mod solver;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
pub use exec::Execution;
pub use generator::{build_generator, SparseGenerator};
pub use measures::{evaluate, PerformanceMeasures};
pub use model::{ModelParams, State, StateSpace};
pub use solver::{solve_stationary, Method, StationaryDistribution};
