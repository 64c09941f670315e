//! Notional functions: bounded maps from the indicator to a position in
//! `[-1, 1]`.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{ConditionalMoments, StandardModel, Standardization};
use crate::normal_math::clip;

/// Anything that maps an indicator value to a position in `[-1, 1]`.
pub trait Notional: Sync {
    fn value(&self, h: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Long,
    Short,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Long => 1.0,
            Side::Short => -1.0,
        }
    }

    /// Long for non-negative values.
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Side::Short
        } else {
            Side::Long
        }
    }
}

/// The notional families used throughout the crate.
#[derive(Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NotionalFunction {
    /// `sign(h - threshold)`, zero exactly at the threshold.
    SignThreshold {
        threshold: f64,
    },
    /// Maximum-information-ratio notional of a normal model,
    /// `2 s g1(h) / g2(h)` with `s` the residual SD, clipped for rounding.
    ClippedRatio {
        model: StandardModel,
    },
    /// `clip(lambda g1(h) / g2(h))` for arbitrary conditional moments.
    LambdaClipped {
        #[serde(serialize_with = "opaque_moments")]
        moments: Arc<dyn ConditionalMoments>,
        lambda: f64,
    },
    /// Constant full position.
    BuyHold {
        side: Side,
    },
    /// No position.
    Flat,
    Tabulated(Tabulated),
}

fn opaque_moments<S: Serializer>(_: &Arc<dyn ConditionalMoments>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("user-supplied")
}

impl NotionalFunction {
    pub fn lambda_clipped(moments: Arc<dyn ConditionalMoments>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "must be positive and finite",
            });
        }
        Ok(Self::LambdaClipped { moments, lambda })
    }

    pub fn eval(&self, h: f64) -> f64 {
        match self {
            Self::SignThreshold { threshold } => {
                let d = h - threshold;
                if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Self::ClippedRatio { model } => {
                let g = model.conditional_moments();
                clip(2.0 * model.residual_sd() * g.g(h))
            }
            Self::LambdaClipped { moments, lambda } => clip(lambda * moments.g(h)),
            Self::BuyHold { side } => side.sign(),
            Self::Flat => 0.0,
            Self::Tabulated(t) => t.eval(h),
        }
    }
}

impl Notional for NotionalFunction {
    #[inline]
    fn value(&self, h: f64) -> f64 {
        self.eval(h)
    }
}

impl fmt::Debug for NotionalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SignThreshold { threshold } => f.debug_struct("SignThreshold").field("threshold", threshold).finish(),
            Self::ClippedRatio { model } => f.debug_struct("ClippedRatio").field("model", model).finish(),
            Self::LambdaClipped { lambda, .. } => f
                .debug_struct("LambdaClipped")
                .field("lambda", lambda)
                .finish_non_exhaustive(),
            Self::BuyHold { side } => f.debug_struct("BuyHold").field("side", side).finish(),
            Self::Flat => f.write_str("Flat"),
            Self::Tabulated(t) => f.debug_tuple("Tabulated").field(t).finish(),
        }
    }
}

/// Piecewise-linear notional through `(h, value)` knots, constant beyond the
/// first and last knot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tabulated {
    h: Vec<f64>,
    value: Vec<f64>,
}

impl Tabulated {
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (h, value): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if h.is_empty() {
            return Err(Error::InvalidGrid("at least one knot is required"));
        }
        if h.iter().chain(&value).any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("knots must be finite"));
        }
        if h.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("knot positions must be strictly increasing"));
        }
        if value.iter().any(|v| v.abs() > 1.0) {
            return Err(Error::InvalidGrid("values must lie in [-1, 1]"));
        }
        Ok(Self { h, value })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.h.iter().copied().zip(self.value.iter().copied())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.h.len();
        if x <= self.h[0] {
            return self.value[0];
        }
        if x >= self.h[n - 1] {
            return self.value[n - 1];
        }
        // First knot strictly greater than x; 1 <= i <= n - 1 here.
        let i = self.h.partition_point(|&k| k <= x);
        let (x0, x1) = (self.h[i - 1], self.h[i]);
        let (y0, y1) = (self.value[i - 1], self.value[i]);
        let t = (x - x0) / (x1 - x0);
        y0 + t * (y1 - y0)
    }
}

impl Notional for Tabulated {
    #[inline]
    fn value(&self, h: f64) -> f64 {
        self.eval(h)
    }
}

/// Applies a notional defined on the standardized indicator to raw indicator
/// values.
pub struct OnRawIndicator<'a, N: ?Sized> {
    inner: &'a N,
    map: Standardization,
}

impl<'a, N: Notional + ?Sized> OnRawIndicator<'a, N> {
    pub fn new(inner: &'a N, map: Standardization) -> Self {
        Self { inner, map }
    }
}

impl<N: Notional + ?Sized> Notional for OnRawIndicator<'_, N> {
    #[inline]
    fn value(&self, h: f64) -> f64 {
        self.inner.value(self.map.to_standard(h))
    }
}
