//! The strategy with the highest expected return.
//!
//! Among all notionals with `|f| <= 1`, `E(f(H) R)` is maximized by
//! `f*(H) = sign(E(R | H))`, with maximum `E|E(R | H)|`. For the standardized
//! normal model that is `sign(H + m)` and `M = rho sigma A(m)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{finite, Error, Result};
use crate::model::StandardModel;
use crate::normal_math::abs_normal_mean;
use crate::notional::{NotionalFunction, Side};

/// Mean, variance and information ratio of a strategy return `Q = f(H) R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyStats {
    pub expected_return: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub information_ratio: f64,
}

impl StrategyStats {
    /// Builds the stats from a mean and a variance. A zero-variance,
    /// zero-mean strategy is reported with an information ratio of zero.
    pub fn from_mean_variance(expected_return: f64, variance: f64) -> Self {
        let variance = variance.max(0.0);
        let std_dev = variance.sqrt();
        let information_ratio = if std_dev > 0.0 {
            expected_return / std_dev
        } else if expected_return == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(expected_return)
        };
        Self {
            expected_return,
            variance,
            std_dev,
            information_ratio,
        }
    }
}

/// How much the indicator tells us about the return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Knowledge {
    /// `rho > 0`: trade the sign of the conditional mean.
    Informative,
    /// `rho = 0`: buy and hold in the direction of the drift.
    None,
    /// `rho = 0` and `mu = 0`: every notional earns zero in expectation.
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalEr {
    pub notional: NotionalFunction,
    pub knowledge: Knowledge,
}

/// `sign(H + m)` on the standardized indicator, or buy-and-hold when the
/// indicator is uninformative.
pub fn optimal_er_notional(model: &StandardModel) -> OptimalEr {
    match model.m_ratio() {
        Ok(m) => OptimalEr {
            notional: NotionalFunction::SignThreshold {
                threshold: m.threshold(),
            },
            knowledge: Knowledge::Informative,
        },
        Err(_) => OptimalEr {
            notional: NotionalFunction::BuyHold {
                side: Side::of(model.mu()),
            },
            knowledge: if model.mu() == 0.0 {
                Knowledge::Degenerate
            } else {
                Knowledge::None
            },
        },
    }
}

/// `M(mu, sigma, rho) = rho sigma A(mu / (rho sigma))`, falling back to the
/// buy-and-hold value `|mu|` at zero correlation.
pub fn max_expected_return(model: &StandardModel) -> f64 {
    let scale = model.rho() * model.sigma();
    if scale == 0.0 {
        return model.mu().abs();
    }
    let m = model.mu() / scale;
    if !m.is_finite() {
        return model.mu().abs();
    }
    scale * abs_normal_mean(m)
}

/// `E|R| = sigma A(mu / sigma)`, the expected return under perfect knowledge.
pub fn perfect_knowledge_return(model: &StandardModel) -> f64 {
    model.sigma() * abs_normal_mean(model.omega())
}

/// Performance of the maximum-expected-return strategy.
///
/// Since `sign(.)^2 = 1` wherever the position is open, `E(Q^2) = E(R^2)`
/// and `V = sigma^2 + mu^2 - M^2`.
pub fn strategy_stats_er(model: &StandardModel) -> StrategyStats {
    let m = max_expected_return(model);
    let second = model.sigma().powi(2) + model.mu().powi(2);
    StrategyStats::from_mean_variance(m, second - m * m)
}

/// Information ratio `Omega(omega, rho)` of the maximum-expected-return
/// strategy as a function of the security information ratio.
pub fn ir_er(omega: f64, rho: f64) -> Result<f64> {
    let model = StandardModel::from_omega(omega, rho)?;
    Ok(strategy_stats_er(&model).information_ratio)
}

fn check_unit_rho(rho: f64) -> Result<f64> {
    finite("rho", rho)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "correlation must lie in [0, 1]",
        });
    }
    Ok(rho)
}

/// `Omega(0, rho) = sqrt(2) rho / sqrt(pi - 2 rho^2)`.
pub fn ir_zero_drift(rho: f64) -> Result<f64> {
    let rho = check_unit_rho(rho)?;
    Ok(2f64.sqrt() * rho / (PI - 2.0 * rho * rho).sqrt())
}

/// Probability that the zero-drift optimal strategy `sign(H) R` is
/// non-negative: `1/2 + asin(rho) / pi`.
pub fn prob_positive(rho: f64) -> Result<f64> {
    let rho = check_unit_rho(rho)?;
    Ok(0.5 + rho.asin() / PI)
}

/// Upper bound on the annualized information ratio of the
/// maximum-expected-return strategy, reached under perfect knowledge.
pub fn annualized_ir_bound(periods_per_year: u32) -> Result<f64> {
    if periods_per_year == 0 {
        return Err(Error::InvalidParameter {
            name: "periods_per_year",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    Ok(ir_zero_drift(1.0)? * f64::from(periods_per_year).sqrt())
}

/// Index of the security whose optimal sign strategy on the shared indicator
/// has the highest expected return; ties go to the lowest index.
pub fn select_best_security(models: &[StandardModel]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, model) in models.iter().enumerate() {
        let m = max_expected_return(model);
        if best.map_or(true, |(_, b)| m > b) {
            best = Some((j, m));
        }
    }
    best.map(|(j, _)| j).ok_or(Error::Empty("no securities to choose from"))
}
