//! Optimal notional functions for trading a security on a historical
//! indicator.
//!
//! Given the joint law of an indicator `H` and the next-period return `R`,
//! the crate constructs
//!
//! * the notional with the highest expected return, `sign(E(R | H))`, and
//! * the notional with the highest information ratio, built from
//!   `E(R | H) / E(R^2 | H)`,
//!
//! evaluates both in closed form for the bivariate normal model, estimates
//! the inputs from data, and checks every closed form against a seeded
//! Monte Carlo simulation.
//!
//! ```
//! use optstrat::{max_er, StandardModel};
//!
//! // Zero drift, 5% volatility, indicator correlation 0.5.
//! let model = StandardModel::new(0.0, 0.05, 0.5)?;
//! let stats = max_er::strategy_stats_er(&model);
//! assert!((stats.expected_return - 0.0199471).abs() < 1e-7);
//! # Ok::<(), optstrat::Error>(())
//! ```

pub mod data;
pub mod error;
pub mod estimate;
pub mod figures;
pub mod max_er;
pub mod max_ir;
pub mod mc;
pub mod model;
pub mod normal_math;
pub mod notional;
pub mod verify;

pub use data::Dataset;
pub use error::{Error, Result};
pub use max_er::StrategyStats;
pub use max_ir::IrSolution;
pub use mc::{McConfig, McResult};
pub use model::{ConditionalMoments, FnMoments, MRatio, NormalMoments, SecurityModel, StandardModel, Standardization};
pub use normal_math::QuadratureSpec;
pub use notional::{Notional, NotionalFunction, Side, Tabulated};
