use optstrat::max_er::{optimal_er_notional, strategy_stats_er};
use optstrat::mc::{
    evaluate_strategy, evaluate_strategy_partitioned, evaluate_strategy_serial, sample_pairs, McConfig,
};
use optstrat::{NotionalFunction, SecurityModel, StandardModel};

const N: u64 = 1_000_000;

fn sign_at_zero() -> NotionalFunction {
    NotionalFunction::SignThreshold { threshold: 0.0 }
}

#[test]
fn sampler_moments() {
    let model = SecurityModel::standardized(0.01, 0.05, 0.4).unwrap();
    let cfg = McConfig::new(7, 0, N).unwrap();
    let n = N as f64;
    let (mut sh, mut sr, mut shh, mut srr, mut shr) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (h, r) in sample_pairs(&model, &cfg) {
        sh += h;
        sr += r;
        shh += h * h;
        srr += r * r;
        shr += h * r;
    }
    let (mh, mr) = (sh / n, sr / n);
    let vh = shh / n - mh * mh;
    let vr = srr / n - mr * mr;
    let corr = (shr / n - mh * mr) / (vh * vr).sqrt();
    assert!(mh.abs() < 4.0 / n.sqrt());
    assert!((mr - 0.01).abs() < 4.0 * 0.05 / n.sqrt());
    assert!((vh - 1.0).abs() < 4.0 * 2f64.sqrt() / n.sqrt());
    assert!((vr.sqrt() - 0.05).abs() < 4.0 * 0.05 / (2.0 * n).sqrt());
    assert!((corr - 0.4).abs() < 4.0 * (1.0 - 0.16) / n.sqrt());
}

#[test]
fn zero_correlation_gives_uncorrelated_draws() {
    let model = SecurityModel::standardized(0.0, 1.0, 0.0).unwrap();
    let cfg = McConfig::new(11, 3, N).unwrap();
    let n = N as f64;
    let mean_hr: f64 = sample_pairs(&model, &cfg).map(|(h, r)| h * r).sum::<f64>() / n;
    assert!(mean_hr.abs() < 4.0 / n.sqrt(), "{mean_hr}");
}

#[test]
fn sign_of_indicator_earns_rho_times_mean_abs_normal() {
    // E(sign(H) R) = rho sigma E|H| with E|H| = sqrt(2/pi).
    let model = SecurityModel::standardized(0.0, 1.0, 0.6).unwrap();
    let res = evaluate_strategy(&sign_at_zero(), &model, &McConfig::new(1, 0, N).unwrap());
    let exact = 0.6 * (2.0 / std::f64::consts::PI).sqrt();
    assert!((exact - 0.478731).abs() < 1e-6);
    assert!((res.mean - exact).abs() < 4.0 * res.se_mean, "{} vs {exact}", res.mean);
}

#[test]
fn hit_rate_matches_orthant_probability() {
    // P(H R >= 0) = 1/2 + asin(rho)/pi for a centred bivariate normal.
    for (k, rho) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let model = SecurityModel::standardized(0.0, 1.0, rho).unwrap();
        let res = evaluate_strategy(&sign_at_zero(), &model, &McConfig::new(5, k as u64, N).unwrap());
        let exact = 0.5 + rho.asin() / std::f64::consts::PI;
        assert!(
            (res.hit_rate - exact).abs() < 4.0 * res.se_hit_rate,
            "rho {rho}: {} vs {exact}",
            res.hit_rate
        );
    }
}

#[test]
fn second_moment_of_a_full_position_is_that_of_the_return() {
    let (mu, sigma) = (0.02, 0.1);
    let model = SecurityModel::standardized(mu, sigma, 0.3).unwrap();
    let res = evaluate_strategy(&sign_at_zero(), &model, &McConfig::new(9, 0, N).unwrap());
    let exact = sigma * sigma + mu * mu;
    assert!((res.second_moment - exact).abs() < 4.0 * res.se_second_moment);
}

#[test]
fn optimal_sign_strategy_matches_closed_form() {
    let std = StandardModel::new(0.01, 0.05, 0.3).unwrap();
    let model = std.to_security_model();
    let f = optimal_er_notional(&std).notional;
    let res = evaluate_strategy(&f, &model, &McConfig::new(42, 1, N).unwrap());
    let stats = strategy_stats_er(&std);
    assert!((res.mean - stats.expected_return).abs() < 4.0 * res.se_mean);
    assert!((res.std_dev - stats.std_dev).abs() < 4.0 * res.se_std_dev);
    assert!((res.information_ratio - stats.information_ratio).abs() < 4.0 * res.se_information_ratio);
}

#[test]
fn reruns_are_bit_identical() {
    let model = SecurityModel::new(1.0, 2.0, 0.01, 0.05, -0.4).unwrap();
    let cfg = McConfig::new(123, 4, 200_000).unwrap();
    let a = evaluate_strategy(&sign_at_zero(), &model, &cfg);
    let b = evaluate_strategy(&sign_at_zero(), &model, &cfg);
    assert_eq!(a, b);
    let pa: Vec<_> = sample_pairs(&model, &cfg).take(1000).collect();
    let pb: Vec<_> = sample_pairs(&model, &cfg).take(1000).collect();
    assert_eq!(pa, pb);
}

#[test]
fn serial_and_partitioned_runs_agree() {
    let model = SecurityModel::standardized(0.01, 0.05, 0.3).unwrap();
    let cfg = McConfig::new(42, 0, 300_001).unwrap();
    let f = sign_at_zero();
    let serial = evaluate_strategy_serial(&f, &model, &cfg);
    let parallel = evaluate_strategy(&f, &model, &cfg);
    let parts = evaluate_strategy_partitioned(&f, &model, &cfg, 8);
    for other in [parallel, parts] {
        assert_eq!(serial.n, other.n);
        assert!((serial.mean - other.mean).abs() <= 1e-12 * serial.mean.abs().max(1e-300));
        assert!((serial.std_dev - other.std_dev).abs() <= 1e-12 * serial.std_dev);
        assert_eq!(serial.hit_rate, other.hit_rate);
    }
}

#[test]
fn raw_and_standardized_models_give_the_same_strategy_returns() {
    // The notional reads the standardized indicator, so rescaling the
    // indicator leaves every draw of Q unchanged.
    let raw = SecurityModel::new(3.0, 0.5, 0.01, 0.05, 0.3).unwrap();
    let map = raw.standardize();
    let std = map.model.to_security_model();
    let cfg = McConfig::new(2, 0, 100_000).unwrap();
    let f = optimal_er_notional(&map.model).notional;
    let a = evaluate_strategy(&f, &raw, &cfg);
    let b = evaluate_strategy(&f, &std, &cfg);
    assert!((a.mean - b.mean).abs() < 1e-12);
    assert_eq!(a.hit_rate, b.hit_rate);
}

#[test]
fn negative_correlation_is_handled_by_flipping_the_indicator() {
    let raw = SecurityModel::new(3.0, 0.5, 0.01, 0.05, -0.3).unwrap();
    let map = raw.standardize();
    assert!(map.flipped);
    let f = optimal_er_notional(&map.model).notional;
    let res = evaluate_strategy(&f, &raw, &McConfig::new(3, 0, N).unwrap());
    let exact = strategy_stats_er(&map.model).expected_return;
    assert!((res.mean - exact).abs() < 4.0 * res.se_mean, "{} vs {exact}", res.mean);
}

#[test]
fn zero_samples_is_rejected() {
    assert!(McConfig::new(0, 0, 0).is_err());
}
