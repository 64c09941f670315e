//! The bivariate-normal indicator/return model and the conditional moments
//! both optimal strategies are built from.
//!
//! Every closed form in this crate is expressed in terms of the *standardized*
//! indicator `H* = (H - mu_H) / sigma_H`, with its sign chosen so that the
//! correlation is non-negative. [`SecurityModel::standardize`] performs that
//! reduction once; downstream code consumes only [`StandardModel`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};

/// Joint normal law of an indicator `H` and the next-period return `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityModel {
    pub mu_h: f64,
    pub sigma_h: f64,
    pub mu: f64,
    pub sigma: f64,
    pub rho: f64,
}

impl SecurityModel {
    pub fn new(mu_h: f64, sigma_h: f64, mu: f64, sigma: f64, rho: f64) -> Result<Self> {
        finite("mu_h", mu_h)?;
        finite("mu", mu)?;
        check_sd("sigma_h", sigma_h)?;
        check_sd("sigma", sigma)?;
        check_rho(rho, -1.0)?;
        Ok(Self {
            mu_h,
            sigma_h,
            mu,
            sigma,
            rho,
        })
    }

    /// Model with an already standardized indicator.
    pub fn standardized(mu: f64, sigma: f64, rho: f64) -> Result<Self> {
        Self::new(0.0, 1.0, mu, sigma, rho)
    }

    /// The security's own information ratio `mu / sigma`.
    pub fn omega(&self) -> f64 {
        self.mu / self.sigma
    }

    /// `m = mu / (rho sigma)`; the sign follows `rho`.
    pub fn m_ratio(&self) -> Result<MRatio> {
        if self.rho == 0.0 {
            return Err(Error::NoKnowledge);
        }
        Ok(MRatio(self.mu / (self.rho * self.sigma)))
    }

    pub fn standardize(&self) -> Standardization {
        let flipped = self.rho < 0.0;
        Standardization {
            model: StandardModel {
                mu: self.mu,
                sigma: self.sigma,
                rho: self.rho.abs(),
            },
            mu_h: self.mu_h,
            sigma_h: self.sigma_h,
            flipped,
        }
    }
}

fn check_sd(name: &'static str, v: f64) -> Result<f64> {
    finite(name, v)?;
    if v <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value: v,
            reason: "standard deviation must be positive",
        });
    }
    Ok(v)
}

fn check_rho(rho: f64, lo: f64) -> Result<f64> {
    finite("rho", rho)?;
    if !(lo..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: if lo == 0.0 {
                "standardized correlation must lie in [0, 1]"
            } else {
                "correlation must lie in [-1, 1]"
            },
        });
    }
    Ok(rho)
}

/// Model for a standardized indicator (`mu_H = 0`, `sigma_H = 1`) with
/// non-negative correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardModel {
    mu: f64,
    sigma: f64,
    rho: f64,
}

impl StandardModel {
    pub fn new(mu: f64, sigma: f64, rho: f64) -> Result<Self> {
        finite("mu", mu)?;
        check_sd("sigma", sigma)?;
        check_rho(rho, 0.0)?;
        Ok(Self { mu, sigma, rho })
    }

    /// Unit-volatility model parameterized by the security information ratio.
    pub fn from_omega(omega: f64, rho: f64) -> Result<Self> {
        Self::new(omega, 1.0, rho)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn omega(&self) -> f64 {
        self.mu / self.sigma
    }

    pub fn m_ratio(&self) -> Result<MRatio> {
        self.to_security_model().m_ratio()
    }

    /// `sqrt(1 - rho^2) sigma`, the conditional standard deviation of `R`.
    pub fn residual_sd(&self) -> f64 {
        (1.0 - self.rho * self.rho).max(0.0).sqrt() * self.sigma
    }

    pub fn to_security_model(&self) -> SecurityModel {
        SecurityModel {
            mu_h: 0.0,
            sigma_h: 1.0,
            mu: self.mu,
            sigma: self.sigma,
            rho: self.rho,
        }
    }

    pub fn conditional_moments(&self) -> NormalMoments {
        NormalMoments { model: *self }
    }
}

impl fmt::Display for StandardModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mu={} sigma={} rho={}", self.mu, self.sigma, self.rho)
    }
}

/// Result of [`SecurityModel::standardize`]: the standardized model plus the
/// affine map from raw indicator values to standardized ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub model: StandardModel,
    pub mu_h: f64,
    pub sigma_h: f64,
    /// Whether the indicator was negated to make the correlation non-negative.
    pub flipped: bool,
}

impl Standardization {
    /// Raw indicator value to standardized, sign-adjusted value.
    pub fn to_standard(&self, h: f64) -> f64 {
        let z = (h - self.mu_h) / self.sigma_h;
        if self.flipped {
            -z
        } else {
            z
        }
    }

    /// Inverse of [`Self::to_standard`].
    pub fn to_raw(&self, z: f64) -> f64 {
        let z = if self.flipped { -z } else { z };
        self.mu_h + self.sigma_h * z
    }
}

/// The m-ratio `mu / (rho sigma)`. Its negative is the threshold of the
/// maximum-expected-return strategy on the standardized indicator.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MRatio(pub f64);

impl MRatio {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn threshold(self) -> f64 {
        // `+ 0.0` turns a negative zero into a positive one.
        -self.0 + 0.0
    }
}

/// First two conditional moments of the return given the indicator:
/// `g1(h) = E(R | H = h)` and `g2(h) = E(R^2 | H = h)`.
///
/// Implementations must keep `g2 > 0` wherever they are evaluated.
pub trait ConditionalMoments: Send + Sync {
    fn g1(&self, h: f64) -> f64;
    fn g2(&self, h: f64) -> f64;

    fn g(&self, h: f64) -> f64 {
        self.g1(h) / self.g2(h)
    }
}

impl<T: ConditionalMoments + ?Sized> ConditionalMoments for Arc<T> {
    fn g1(&self, h: f64) -> f64 {
        (**self).g1(h)
    }
    fn g2(&self, h: f64) -> f64 {
        (**self).g2(h)
    }
    fn g(&self, h: f64) -> f64 {
        (**self).g(h)
    }
}

/// Conditional moments of the bivariate normal model on the standardized
/// indicator: `g1 = mu + rho sigma h`, `g2 = g1^2 + (1 - rho^2) sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMoments {
    model: StandardModel,
}

impl NormalMoments {
    pub fn model(&self) -> &StandardModel {
        &self.model
    }

    /// Whether `g` is singular (`rho = 1` and `mu = 0` gives `g = 1/g1`).
    pub fn is_degenerate(&self) -> bool {
        self.model.residual_sd() == 0.0 && self.model.mu == 0.0
    }
}

impl ConditionalMoments for NormalMoments {
    #[inline]
    fn g1(&self, h: f64) -> f64 {
        self.model.mu + self.model.rho * self.model.sigma * h
    }

    #[inline]
    fn g2(&self, h: f64) -> f64 {
        let g1 = self.g1(h);
        let s = self.model.residual_sd();
        g1 * g1 + s * s
    }
}

/// Conditional moments supplied as closures, for non-normal joint laws.
pub struct FnMoments<F1, F2> {
    g1: F1,
    g2: F2,
}

impl<F1, F2> FnMoments<F1, F2>
where
    F1: Fn(f64) -> f64 + Send + Sync,
    F2: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(g1: F1, g2: F2) -> Self {
        Self { g1, g2 }
    }
}

impl<F1, F2> ConditionalMoments for FnMoments<F1, F2>
where
    F1: Fn(f64) -> f64 + Send + Sync,
    F2: Fn(f64) -> f64 + Send + Sync,
{
    fn g1(&self, h: f64) -> f64 {
        (self.g1)(h)
    }
    fn g2(&self, h: f64) -> f64 {
        (self.g2)(h)
    }
}

impl<F1, F2> fmt::Debug for FnMoments<F1, F2> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnMoments")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_math::{integrate_gaussian_weighted, QuadratureSpec};
    use proptest::prelude::*;

    #[test]
    fn standardize_identity() {
        let m = SecurityModel::new(0.0, 1.0, 0.01, 0.05, 0.5).unwrap();
        let s = m.standardize();
        assert!(!s.flipped);
        assert_eq!(s.model, StandardModel::new(0.01, 0.05, 0.5).unwrap());
        assert_eq!(s.to_standard(0.3), 0.3);
    }

    #[test]
    fn standardize_flips_negative_correlation() {
        let m = SecurityModel::new(3.0, 2.0, 0.01, 0.05, -0.4).unwrap();
        let s = m.standardize();
        assert!(s.flipped);
        assert_eq!(s.model.rho(), 0.4);
        assert_eq!(s.model.mu(), 0.01);
        assert_eq!(s.model.sigma(), 0.05);
        assert_eq!(s.to_standard(5.0), -1.0);
        assert_eq!(s.to_raw(-1.0), 5.0);
    }

    #[test]
    fn rejects_invalid() {
        assert!(SecurityModel::new(0.0, 0.0, 0.0, 1.0, 0.1).is_err());
        assert!(SecurityModel::new(0.0, 1.0, 0.0, -1.0, 0.1).is_err());
        assert!(SecurityModel::new(0.0, 1.0, 0.0, 1.0, 1.5).is_err());
        assert!(SecurityModel::new(f64::NAN, 1.0, 0.0, 1.0, 0.1).is_err());
        assert!(StandardModel::new(0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn m_ratio_values() {
        let m = StandardModel::new(0.0, 0.05, 0.3).unwrap();
        assert_eq!(m.m_ratio().unwrap().value(), 0.0);
        let m = StandardModel::new(0.025, 0.05, 0.5).unwrap();
        assert!((m.m_ratio().unwrap().value() - 1.0).abs() < 1e-15);
        assert_eq!(m.m_ratio().unwrap().threshold(), -m.m_ratio().unwrap().value());
        let m = StandardModel::new(0.01, 0.05, 0.0).unwrap();
        assert_eq!(m.m_ratio(), Err(Error::NoKnowledge));
    }

    #[test]
    fn conditional_moment_examples() {
        let g = StandardModel::new(0.0, 0.7, 0.3).unwrap().conditional_moments();
        assert_eq!(g.g1(0.0), 0.0);
        assert!((g.g2(0.0) - (1.0 - 0.09) * 0.49).abs() < 1e-15);
        assert_eq!(g.g(0.0), 0.0);

        let g = StandardModel::new(0.0, 1.0, 0.6).unwrap().conditional_moments();
        assert!((g.g1(1.0) - 0.6).abs() < 1e-15);
        assert!((g.g2(1.0) - 1.0).abs() < 1e-15);
        assert!((g.g(1.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn total_expectation() {
        let spec = QuadratureSpec::default();
        let model = StandardModel::new(0.02, 0.05, 0.4).unwrap();
        let g = model.conditional_moments();
        let e1 = integrate_gaussian_weighted(|h| g.g1(h), &spec).unwrap();
        let e2 = integrate_gaussian_weighted(|h| g.g2(h), &spec).unwrap();
        assert!((e1 - 0.02).abs() < 1e-12);
        assert!((e2 - (0.02f64.powi(2) + 0.05f64.powi(2))).abs() < 1e-12);
    }

    #[test]
    fn degenerate_flag() {
        assert!(StandardModel::new(0.0, 1.0, 1.0)
            .unwrap()
            .conditional_moments()
            .is_degenerate());
        assert!(!StandardModel::new(0.1, 1.0, 1.0)
            .unwrap()
            .conditional_moments()
            .is_degenerate());
    }

    #[test]
    fn fn_moments_hook() {
        let g = FnMoments::new(|h: f64| h.tanh(), |h: f64| 1.0 + h * h);
        assert!((g.g(1.0) - 1f64.tanh() / 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn conditional_variance_is_constant(
            mu in -0.1f64..0.1, sigma in 0.01f64..0.5, rho in 0.0f64..0.999, h in -8.0f64..8.0
        ) {
            let model = StandardModel::new(mu, sigma, rho).unwrap();
            let g = model.conditional_moments();
            let var = g.g2(h) - g.g1(h).powi(2);
            let want = (1.0 - rho * rho) * sigma * sigma;
            prop_assert!((var - want).abs() < 1e-12);
            prop_assert!(g.g2(h) >= want * (1.0 - 1e-12));
            prop_assert!((g.g(h) * g.g2(h) - g.g1(h)).abs() < 1e-12);
        }

        #[test]
        fn m_ratio_is_standardization_invariant(
            mu_h in -5.0f64..5.0, sigma_h in 0.1f64..10.0,
            mu in -0.1f64..0.1, sigma in 0.01f64..0.5, rho in 0.01f64..1.0
        ) {
            let raw = SecurityModel::new(mu_h, sigma_h, mu, sigma, rho).unwrap();
            let std = raw.standardize().model;
            prop_assert_eq!(raw.m_ratio().unwrap(), std.m_ratio().unwrap());
        }
    }
}
