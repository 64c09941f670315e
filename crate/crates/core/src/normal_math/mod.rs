//! Special functions and the Gaussian-weighted quadrature engine.

mod quadrature;
mod special;

pub use quadrature::{integrate, integrate_gaussian_weighted, Integral, QuadratureSpec};
pub use special::{
    a_of_theta, clip, erf, erfc, erfcx_scaled, std_normal_cdf, std_normal_pdf, tau_of_m, SQRT_2_OVER_PI,
};

#[cfg(test)]
pub(crate) use special::norm_cdf;
pub(crate) use special::{abs_normal_mean, one_minus_b_mills};

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn a_of_theta_decomposes(theta in -10.0f64..10.0) {
            let a = a_of_theta(theta).unwrap();
            let via_tau = theta * tau_of_m(theta).unwrap()
                + SQRT_2_OVER_PI * (-0.5 * theta * theta).exp();
            prop_assert!((a - via_tau).abs() < 1e-13);
            prop_assert!(a >= theta.abs());
            prop_assert_eq!(a, a_of_theta(-theta).unwrap());
        }

        #[test]
        fn tau_is_odd_and_bounded(m in -30.0f64..30.0) {
            let t = tau_of_m(m).unwrap();
            prop_assert!((-1.0..=1.0).contains(&t));
            prop_assert_eq!(t, -tau_of_m(-m).unwrap());
        }

        #[test]
        fn cdf_is_monotone(x in -37.0f64..37.0, dx in 0.0f64..1.0) {
            prop_assert!(norm_cdf(x + dx) >= norm_cdf(x));
        }
    }

    #[test]
    fn a_of_theta_merges_with_abs() {
        for i in 0..=400 {
            let theta = 6.0 + i as f64 * 0.05;
            for t in [theta, -theta] {
                assert!((a_of_theta(t).unwrap() - t.abs()).abs() < 1e-6);
            }
        }
    }
}
