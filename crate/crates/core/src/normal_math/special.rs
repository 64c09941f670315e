//! Error-function family and the normal-distribution kernels built on it.
//!
//! `erf`, `erfc` and `erfcx` use W. J. Cody's rational Chebyshev
//! approximations (the `CALERF` routine), which are accurate to roughly one
//! unit in the last place over the whole real line. The scaled form `erfcx`
//! never forms `exp(x^2)` explicitly, so it is usable far beyond the point
//! where `erfc` underflows.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{finite, Error, Result};

/// `sqrt(2 / pi)`, i.e. `E|Z|` for a standard normal `Z`.
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

const THRESH: f64 = 0.46875;
const XSMALL: f64 = 1.11e-16;
const XBIG: f64 = 26.543;
const XHUGE: f64 = 6.71e7;
const XMAX: f64 = 2.53e307;
const XNEG: f64 = -26.628;

const A: [f64; 5] = [
    3.161_123_743_870_565_6,
    1.138_641_541_510_501_6e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_5e3,
    1.857_777_061_846_031_5e-1,
];
const B: [f64; 4] = [
    2.360_129_095_234_412_1e1,
    2.440_246_379_344_441_7e2,
    1.282_616_526_077_372_3e3,
    2.844_236_833_439_170_6e3,
];
const C: [f64; 9] = [
    5.641_884_969_886_700_9e-1,
    8.883_149_794_388_376,
    6.611_919_063_714_163e1,
    2.986_351_381_974_001_3e2,
    8.819_522_212_417_691e2,
    1.712_047_612_634_070_6e3,
    2.051_078_377_826_071_5e3,
    1.230_339_354_797_997_2e3,
    2.153_115_354_744_038_5e-8,
];
const D: [f64; 8] = [
    1.574_492_611_070_983_5e1,
    1.176_939_508_913_125e2,
    5.371_811_018_620_098_6e2,
    1.621_389_574_566_690_2e3,
    3.290_799_235_733_459_7e3,
    4.362_619_090_143_247e3,
    3.439_367_674_143_721_6e3,
    1.230_339_354_803_749_4e3,
];
const P: [f64; 6] = [
    3.053_266_349_612_323_4e-1,
    3.603_448_999_498_044_4e-1,
    1.257_817_261_112_292_5e-1,
    1.608_378_514_874_227_7e-2,
    6.587_491_615_298_378e-4,
    1.631_538_713_730_209_8e-2,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822_4,
    1.872_952_849_923_460_4,
    5.279_051_029_514_284e-1,
    6.051_834_131_244_132e-2,
    2.335_204_976_268_691_8e-3,
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Erf,
    Erfc,
    Erfcx,
}

/// `exp(-y^2)` split as `exp(-t^2) * exp(-(y - t)(y + t))` with `t` the
/// argument truncated to 1/16, which keeps the product accurate for large `y`.
#[inline]
fn exp_neg_sq(y: f64) -> f64 {
    let t = (y * 16.0).trunc() / 16.0;
    let del = (y - t) * (y + t);
    (-t * t).exp() * (-del).exp()
}

fn calerf(x: f64, kind: Kind) -> f64 {
    let y = x.abs();

    if y <= THRESH {
        let ysq = if y > XSMALL { y * y } else { 0.0 };
        let mut num = A[4] * ysq;
        let mut den = ysq;
        for i in 0..3 {
            num = (num + A[i]) * ysq;
            den = (den + B[i]) * ysq;
        }
        let erf = x * (num + A[3]) / (den + B[3]);
        return match kind {
            Kind::Erf => erf,
            Kind::Erfc => 1.0 - erf,
            Kind::Erfcx => ysq.exp() * (1.0 - erf),
        };
    }

    // `r` holds erfc(|x|), or erfcx(|x|) for Kind::Erfcx.
    let r = if y <= 4.0 {
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        let r = (num + C[7]) / (den + D[7]);
        if kind == Kind::Erfcx {
            r
        } else {
            r * exp_neg_sq(y)
        }
    } else if y >= XBIG && (kind != Kind::Erfcx || y >= XMAX) {
        0.0
    } else if y >= XHUGE {
        FRAC_1_SQRT_PI / y
    } else {
        let ysq = 1.0 / (y * y);
        let mut num = P[5] * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + P[i]) * ysq;
            den = (den + Q[i]) * ysq;
        }
        let r = ysq * (num + P[4]) / (den + Q[4]);
        let r = (FRAC_1_SQRT_PI - r) / y;
        if kind == Kind::Erfcx {
            r
        } else {
            r * exp_neg_sq(y)
        }
    };

    match kind {
        Kind::Erf => {
            let v = (0.5 - r) + 0.5;
            if x < 0.0 {
                -v
            } else {
                v
            }
        }
        Kind::Erfc => {
            if x < 0.0 {
                2.0 - r
            } else {
                r
            }
        }
        Kind::Erfcx => {
            if x >= 0.0 {
                r
            } else if x < XNEG {
                f64::INFINITY
            } else {
                let t = (x * 16.0).trunc() / 16.0;
                let del = (x - t) * (x + t);
                let e = (t * t).exp() * del.exp();
                (e + e) - r
            }
        }
    }
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    calerf(x, Kind::Erf)
}

/// Complementary error function `1 - erf(x)`.
pub fn erfc(x: f64) -> f64 {
    calerf(x, Kind::Erfc)
}

/// Scaled complementary error function `exp(x^2) * erfc(x)` for `x >= 0`.
///
/// This is the overflow-free way to evaluate normal tail products of the form
/// `exp(b^2/2) * (1 - N(b)) = erfcx(b / sqrt(2)) / 2`.
pub fn erfcx_scaled(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::NonFinite { name: "x", value: x });
    }
    if x < 0.0 {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            reason: "erfcx_scaled is only defined here for x >= 0",
        });
    }
    Ok(calerf(x, Kind::Erfcx))
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal CDF `N(x)`.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    finite("x", x).map(norm_cdf)
}

/// `2 N(m) - 1`, evaluated as `erf(m / sqrt 2)` to keep full relative
/// precision near zero.
pub fn tau_of_m(m: f64) -> Result<f64> {
    finite("m", m).map(tau)
}

#[inline]
pub(crate) fn tau(m: f64) -> f64 {
    erf(m * FRAC_1_SQRT_2)
}

/// `A(theta) = E|X|` for `X ~ N(theta, 1)`:
/// `sqrt(2/pi) exp(-theta^2/2) + theta (2 N(theta) - 1)`.
pub fn a_of_theta(theta: f64) -> Result<f64> {
    finite("theta", theta).map(abs_normal_mean)
}

/// Written as `|theta| + 2 phi(theta) (1 - |theta| R(|theta|))` with `R` the
/// Mills ratio, so the (non-negative) excess over `|theta|` keeps its relative
/// precision for large `|theta|`.
#[inline]
pub(crate) fn abs_normal_mean(theta: f64) -> f64 {
    let t = theta.abs();
    t + 2.0 * std_normal_pdf(t) * one_minus_b_mills(t)
}

/// The clipping function: identity on `(-1, 1)`, saturating at `-1` and `1`.
#[inline]
pub fn clip(x: f64) -> f64 {
    debug_assert!(!x.is_nan());
    x.clamp(-1.0, 1.0)
}

/// Mills ratio complement `1 - b R(b)` where `R(b) = (1 - N(b)) / phi(b)`.
///
/// For moderate `b` this is `1 - sqrt(pi/2) b erfcx(b/sqrt2)`. For large `b`
/// the difference cancels catastrophically, so the continued fraction
/// `R(b) = 1/(b + 1/(b + 2/(b + 3/(b + ...))))` is used instead: writing the
/// denominator as `b + t` gives `1 - b R(b) = t / (b + t)` with no
/// subtraction of nearly equal numbers.
pub(crate) fn one_minus_b_mills(b: f64) -> f64 {
    debug_assert!(b >= 0.0);
    if b < MILLS_CF_CUTOFF {
        let r = calerf(b * FRAC_1_SQRT_2, Kind::Erfcx);
        1.0 - (PI / 2.0).sqrt() * b * r
    } else {
        // Backward evaluation of 1/(b + 2/(b + 3/(b + ...))).
        let mut tail = 0.0;
        for k in (2..=MILLS_CF_TERMS).rev() {
            tail = k as f64 / (b + tail);
        }
        let t = 1.0 / (b + tail);
        t / (b + t)
    }
}

pub(crate) const MILLS_CF_CUTOFF: f64 = 5.0;
const MILLS_CF_TERMS: usize = 400;

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Simpson on [a, b] with compensated summation; test-only
    // oracle independent of erf.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let y = w * f(a + h * i as f64) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum * h / 3.0
    }

    fn density(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn cdf_at_one_matches_integrated_density() {
        let oracle = 0.5 + simpson(density, 0.0, 1.0, 20_000);
        let cdf = std_normal_cdf(1.0).unwrap();
        assert!((cdf - oracle).abs() < 1e-14, "{cdf} vs {oracle}");
        assert!((cdf - 0.841345).abs() < 5e-7);
    }

    #[test]
    fn cdf_limits() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert_eq!(std_normal_cdf(40.0).unwrap(), 1.0);
        assert_eq!(std_normal_cdf(-40.0).unwrap(), 0.0);
        assert!(std_normal_cdf(f64::NAN).is_err());
        assert!(std_normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn cdf_against_dense_integration() {
        for &x in &[-8.0f64, -3.5, -1.2, -0.3, 0.2, 0.9, 2.5, 6.0] {
            let half = simpson(density, 0.0, x.abs(), 40_000);
            let oracle = if x < 0.0 { 0.5 - half } else { 0.5 + half };
            let got = norm_cdf(x);
            assert!((got - oracle).abs() < 1e-14, "x={x}: {got} vs {oracle}");
        }
    }

    #[test]
    fn erfcx_at_one_matches_tail_integral() {
        // e * erfc(1) = e * 2/sqrt(pi) * int_1^inf exp(-t^2) dt
        let tail = simpson(|t| (-t * t).exp(), 1.0, 12.0, 200_000);
        let oracle = std::f64::consts::E * 2.0 / PI.sqrt() * tail;
        let got = erfcx_scaled(1.0).unwrap();
        assert!((got - oracle).abs() < 1e-13, "{got} vs {oracle}");
        assert!((got - 0.427584).abs() < 5e-7);
    }

    #[test]
    fn erfcx_edges() {
        assert_eq!(erfcx_scaled(0.0).unwrap(), 1.0);
        let x = 1e6;
        let asym = 1.0 / (x * PI.sqrt());
        assert!((erfcx_scaled(x).unwrap() / asym - 1.0).abs() < 1e-9);
        let huge = erfcx_scaled(1e8).unwrap();
        assert!(huge.is_finite() && huge > 0.0);
        assert!(erfcx_scaled(-0.5).is_err());
        assert!(erfcx_scaled(f64::NAN).is_err());
    }

    #[test]
    fn erfcx_matches_direct_tail_product() {
        for i in 0..=300 {
            let b = i as f64 * 0.1;
            let scaled = 0.5 * erfcx_scaled(b / 2f64.sqrt()).unwrap();
            let direct = (0.5 * b * b).exp() * (1.0 - norm_cdf(b));
            if b <= 3.0 {
                assert!((scaled / direct - 1.0).abs() < 1e-12, "b={b}");
            }
            // Further out 1 - N(b) cancels; the upper tail is taken as N(-b).
            let direct_tail = (0.5 * b * b).exp() * norm_cdf(-b);
            assert!((scaled / direct_tail - 1.0).abs() < 1e-12, "b={b}");
        }
    }

    #[test]
    fn erf_symmetry_and_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-16);
        assert!((erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-16);
        for &x in &[0.1, 0.47, 1.3, 3.9, 4.1, 7.0] {
            assert_eq!(erf(-x), -erf(x));
            assert!((erfc(-x) - (2.0 - erfc(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn a_of_theta_printed_values() {
        assert!((a_of_theta(0.0).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!((a_of_theta(1.0).unwrap() - 1.167).abs() < 5e-4);
        assert!((a_of_theta(2.0).unwrap() - 2.017).abs() < 5e-4);
        assert!((a_of_theta(3.0).unwrap() - 3.001).abs() < 5e-4);
    }

    #[test]
    fn a_of_theta_is_mean_absolute_value() {
        // E|X| for X ~ N(theta, 1), by direct integration of |x| phi(x - theta).
        for &theta in &[-2.5, -0.4, 0.0, 0.7, 1.9] {
            let oracle = simpson(|x| x.abs() * density(x - theta), -20.0, 20.0, 400_000);
            let got = a_of_theta(theta).unwrap();
            assert!((got - oracle).abs() < 1e-12, "theta={theta}");
        }
    }

    #[test]
    fn tau_values() {
        assert_eq!(tau_of_m(0.0).unwrap(), 0.0);
        assert_eq!(tau_of_m(40.0).unwrap(), 1.0);
        let t1 = tau_of_m(1.0).unwrap();
        assert!((t1 - (2.0 * norm_cdf(1.0) - 1.0)).abs() < 1e-15);
        assert!((t1 - 0.682689).abs() < 5e-7);
    }

    #[test]
    fn clip_saturates() {
        assert_eq!(clip(0.5), 0.5);
        assert_eq!(clip(-3.0), -1.0);
        assert_eq!(clip(1.0), 1.0);
        assert_eq!(clip(7.0), 1.0);
    }

    #[test]
    fn mills_branches_agree_at_cutoff() {
        for &b in &[4.0, 4.5, 5.0, 6.0, 8.0] {
            let r = calerf(b * FRAC_1_SQRT_2, Kind::Erfcx);
            let direct = 1.0 - (PI / 2.0).sqrt() * b * r;
            let mut tail = 0.0;
            for k in (2..=MILLS_CF_TERMS).rev() {
                tail = k as f64 / (b + tail);
            }
            let t = 1.0 / (b + tail);
            let cf = t / (b + t);
            assert!((direct / cf - 1.0).abs() < 1e-12, "b={b}: {direct} vs {cf}");
        }
    }

    #[test]
    fn mills_complement_asymptotics() {
        // 1 - bR(b) ~ 1/b^2 - 3/b^4 + 15/b^6 for large b
        for &b in &[1e3f64, 1e5, 1e8] {
            let want = 1.0 / (b * b) - 3.0 / b.powi(4) + 15.0 / b.powi(6);
            assert!((one_minus_b_mills(b) / want - 1.0).abs() < 1e-12);
        }
        assert_eq!(one_minus_b_mills(0.0), 1.0);
    }
}
