//! The strategy with the highest information ratio.
//!
//! For conditional moments `g1 = E(R|H)` and `g2 = E(R^2|H)`, the notional
//! `g = g1 / g2` (rescaled to fit `|f| <= 1` when it is bounded) maximizes
//! the information ratio, and the maximum is `sqrt(zeta) / sqrt(1 - zeta)`
//! with `zeta = E(g1^2 / g2)`. When `g` is unbounded the best
//! notional-constrained strategy is found among the clipped family
//! `clip(lambda g)`.
//!
//! In the normal model `g1 = mu + rho sigma H` and
//! `g2 = g1^2 + (1 - rho^2) sigma^2`, so with `s = sqrt(1 - rho^2) sigma`
//! the ratio `g = g1 / (g1^2 + s^2)` peaks at `g1 = s` with value `1/(2s)`
//! and bottoms out at `g1 = -s`. Those two points are
//! `H+- = -m +- sqrt(1 - rho^2) / rho`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{finite, Error, Result};
use crate::max_er::ir_zero_drift;
use crate::model::{ConditionalMoments, StandardModel};
use crate::normal_math::{clip, integrate_gaussian_weighted, one_minus_b_mills, QuadratureSpec, SQRT_2_OVER_PI};
use crate::notional::{NotionalFunction, Side};

/// `b(rho) = sqrt(1 - rho^2) / rho`.
pub fn b_of_rho(rho: f64) -> f64 {
    (1.0 - rho * rho).max(0.0).sqrt() / rho
}

fn check_open_rho(rho: f64) -> Result<f64> {
    finite("rho", rho)?;
    if rho <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "correlation must be positive",
        });
    }
    if rho > 1.0 {
        return Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "correlation must not exceed 1",
        });
    }
    Ok(rho)
}

/// `zeta` for a zero-drift security:
/// `1 - sqrt(2 pi) exp(b^2/2) b (1 - N(b))` with `b = b(rho)`.
///
/// Evaluated as `1 - sqrt(pi/2) b erfcx(b / sqrt 2)`, switching to a
/// continued fraction for large `b` (small `rho`) where the subtraction
/// would cancel.
pub fn zeta_closed_form(rho: f64) -> Result<f64> {
    let rho = check_open_rho(rho)?;
    Ok(one_minus_b_mills(b_of_rho(rho)))
}

/// `sqrt(zeta) / sqrt(1 - zeta)`; infinite at `zeta = 1`.
pub fn max_ir_from_zeta(zeta: f64) -> Result<f64> {
    finite("zeta", zeta)?;
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::InvalidParameter {
            name: "zeta",
            value: zeta,
            reason: "must lie in [0, 1]",
        });
    }
    Ok((zeta / (1.0 - zeta)).sqrt())
}

/// `(pi (1 - rho))^(-1/4)`, the growth of the zero-drift maximum
/// information ratio as `rho -> 1`.
pub fn ir_asymptotic_approx(rho: f64) -> Result<f64> {
    finite("rho", rho)?;
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "correlation must lie in [0, 1)",
        });
    }
    Ok((PI * (1.0 - rho)).powf(-0.25))
}

/// Indicator values `(H-, H+)` where the normal-model notional reaches
/// `-1` and `+1`.
pub fn h_extremes(model: &StandardModel) -> Result<(f64, f64)> {
    let m = model.m_ratio()?.value();
    let b = b_of_rho(model.rho());
    Ok((-m - b, -m + b))
}

/// The information-ratio optimal notional of the normal model,
/// `2 s (mu + H rho sigma) / (mu^2 + s^2 + 2 H mu rho sigma + H^2 rho^2 sigma^2)`.
///
/// With zero correlation `g` is constant, so the optimum is buy-and-hold in
/// the direction of the drift (or no position at all without drift).
pub fn optimal_ir_notional(model: &StandardModel) -> Result<NotionalFunction> {
    if model.rho() == 0.0 {
        return Ok(if model.mu() == 0.0 {
            NotionalFunction::Flat
        } else {
            NotionalFunction::BuyHold {
                side: Side::of(model.mu()),
            }
        });
    }
    if model.rho() >= 1.0 {
        return Err(Error::DegenerateCorrelation);
    }
    Ok(NotionalFunction::ClippedRatio { model: *model })
}

/// `zeta = E(g1^2 / g2)` by adaptive quadrature over the standardized
/// indicator.
pub fn zeta_quadrature(model: &StandardModel, spec: &QuadratureSpec) -> Result<f64> {
    if model.rho() >= 1.0 {
        return Err(Error::DegenerateCorrelation);
    }
    // Work in units of sigma: x = g1 / sigma, s^2 = 1 - rho^2.
    let omega = model.omega();
    let rho = model.rho();
    let s2 = 1.0 - rho * rho;
    integrate_gaussian_weighted(
        |h| {
            let x = omega + rho * h;
            let x2 = x * x;
            x2 / (x2 + s2)
        },
        spec,
    )
}

/// `zeta` by closed form when the drift is zero, by quadrature otherwise.
pub fn zeta(model: &StandardModel, spec: &QuadratureSpec) -> Result<f64> {
    if model.mu() == 0.0 {
        if model.rho() == 0.0 {
            return Ok(0.0);
        }
        zeta_closed_form(model.rho())
    } else {
        zeta_quadrature(model, spec)
    }
}

/// Everything about the maximum-information-ratio strategy of a normal model.
#[derive(Debug, Clone, Serialize)]
pub struct IrSolution {
    pub zeta: f64,
    pub b: f64,
    pub max_ir: f64,
    /// `E(f* R) = 2 sqrt(1 - rho^2) sigma zeta`.
    pub expected_return: f64,
    pub std_dev: f64,
    pub h_plus: f64,
    pub h_minus: f64,
    pub notional: NotionalFunction,
}

pub fn ir_solution(model: &StandardModel, spec: &QuadratureSpec) -> Result<IrSolution> {
    if model.rho() == 0.0 {
        return Err(Error::NoKnowledge);
    }
    let notional = optimal_ir_notional(model)?;
    let zeta = zeta(model, spec)?;
    let (h_minus, h_plus) = h_extremes(model)?;
    let scale = 2.0 * model.residual_sd();
    #[cfg(debug_assertions)]
    check_extremes(model, h_minus, h_plus);
    Ok(IrSolution {
        zeta,
        b: b_of_rho(model.rho()),
        max_ir: max_ir_from_zeta(zeta)?,
        expected_return: scale * zeta,
        std_dev: scale * (zeta * (1.0 - zeta)).sqrt(),
        h_plus,
        h_minus,
        notional,
    })
}

/// Cross-checks the closed-form extremes of `g` against a grid search.
#[cfg(debug_assertions)]
fn check_extremes(model: &StandardModel, h_minus: f64, h_plus: f64) {
    let g = model.conditional_moments();
    let peak = 1.0 / (2.0 * model.residual_sd());
    let tol = 1e-9 * peak;
    debug_assert!((g.g(h_plus) - peak).abs() <= tol);
    debug_assert!((g.g(h_minus) + peak).abs() <= tol);
    let span = (h_plus - h_minus).abs().max(1.0);
    for i in 0..=200 {
        let h = h_minus - span + 3.0 * span * i as f64 / 200.0;
        debug_assert!(g.g(h).abs() <= peak + tol, "g({h}) exceeds closed-form peak");
    }
}

/// `clip(lambda g1(H) / g2(H))`.
pub fn lambda_clipped_notional(moments: Arc<dyn ConditionalMoments>, lambda: f64) -> Result<NotionalFunction> {
    NotionalFunction::lambda_clipped(moments, lambda)
}

/// Information ratio of the clipped notional `clip(lambda g)` under a
/// standard normal indicator.
pub fn clipped_information_ratio(moments: &dyn ConditionalMoments, lambda: f64, spec: &QuadratureSpec) -> Result<f64> {
    let scale = lambda.min(1.0 / ratio_peak(moments, spec));
    clipped_ir_scaled(moments, lambda, scale, spec)
}

/// Rough `max |g|` over the integration domain. Only used to rescale the
/// notional, which leaves the information ratio unchanged.
fn ratio_peak(moments: &dyn ConditionalMoments, spec: &QuadratureSpec) -> f64 {
    let w = spec.integration_halfwidth;
    let peak = (0..=4000)
        .map(|i| moments.g(-w + 2.0 * w * i as f64 / 4000.0).abs())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    if peak > 0.0 {
        peak
    } else {
        1.0
    }
}

// The notional is divided by `scale` so the integrands stay O(g g1) whatever
// lambda is; otherwise the absolute tolerance dominates for small lambda.
fn clipped_ir_scaled(moments: &dyn ConditionalMoments, lambda: f64, scale: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = |h: f64| clip(lambda * moments.g(h)) / scale;
    let mean = integrate_gaussian_weighted(|h| f(h) * moments.g1(h), spec)?;
    let second = integrate_gaussian_weighted(
        |h| {
            let v = f(h);
            v * v * moments.g2(h)
        },
        spec,
    )?;
    let var = second - mean * mean;
    Ok(if var > 0.0 {
        mean / var.sqrt()
    } else if mean == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(mean)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaOptimum {
    pub lambda: f64,
    pub information_ratio: f64,
}

const LOG_LAMBDA_BOUND: f64 = 12.0;
const LOG_LAMBDA_STEP: f64 = 0.5;
const LOG_LAMBDA_TOL: f64 = 1e-8;

/// Maximizes the information ratio of `clip(lambda g)` over `lambda > 0`.
///
/// `log lambda` is scanned on `[-12, 12]` at a step of 0.5; the scan must be
/// unimodal (plateaus allowed), otherwise [`Error::NonUnimodal`] is returned.
/// The best bracket is then refined by golden-section search to `1e-8` in
/// `log lambda`.
pub fn optimize_lambda(moments: &dyn ConditionalMoments, spec: &QuadratureSpec) -> Result<LambdaOptimum> {
    let inv_peak = 1.0 / ratio_peak(moments, spec);
    let ir = |log_l: f64| {
        let lambda = log_l.exp();
        clipped_ir_scaled(moments, lambda, lambda.min(inv_peak), spec)
    };

    let steps = (2.0 * LOG_LAMBDA_BOUND / LOG_LAMBDA_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| -LOG_LAMBDA_BOUND + LOG_LAMBDA_STEP * i as f64)
        .collect();
    let values = grid.iter().map(|&x| ir(x)).collect::<Result<Vec<_>>>()?;

    let (best, &best_value) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("grid is non-empty");

    let slack = 1e-7 * best_value.abs().max(1e-300);
    for i in 1..values.len() {
        let rising = i <= best;
        let ok = if rising {
            values[i] >= values[i - 1] - slack
        } else {
            values[i] <= values[i - 1] + slack
        };
        if !ok {
            return Err(Error::NonUnimodal { log_lambda: grid[i] });
        }
    }

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (x, fx) = golden_section_max(&ir, lo, hi, LOG_LAMBDA_TOL)?;
    let (x, fx) = if fx >= best_value {
        (x, fx)
    } else {
        (grid[best], best_value)
    };
    Ok(LambdaOptimum {
        lambda: x.exp(),
        information_ratio: fx,
    })
}

fn golden_section_max<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// One row of the zero-drift comparison between the two optimal strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub rho: f64,
    /// Expected return of the max-ER strategy over that of the max-IR one.
    pub er_ratio: f64,
    /// Max-IR strategy's information ratio minus the max-ER strategy's.
    pub ir_diff: f64,
}

/// Zero-drift comparison curves on the given correlations, each in `(0, 1)`.
pub fn comparison_curves(rho_grid: &[f64]) -> Result<Vec<ComparisonRow>> {
    rho_grid
        .iter()
        .map(|&rho| {
            finite("rho", rho)?;
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::InvalidParameter {
                    name: "rho",
                    value: rho,
                    reason: "comparison curves are defined for 0 < rho < 1",
                });
            }
            let zeta = zeta_closed_form(rho)?;
            let er = rho * SQRT_2_OVER_PI;
            let ir_er = ir_zero_drift(rho)?;
            Ok(ComparisonRow {
                rho,
                er_ratio: er / (2.0 * (1.0 - rho * rho).sqrt() * zeta),
                ir_diff: max_ir_from_zeta(zeta)? - ir_er,
            })
        })
        .collect()
}
