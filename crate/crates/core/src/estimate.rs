//! Parameter estimation from data: sample moments, the m-ratio, indicator
//! reduction by least squares, and momentum indicators from prices.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Dataset, MultiDataset, PriceSeries};
use crate::error::{Error, Result};
use crate::mc::McConfig;
use crate::model::SecurityModel;
use rand_core::RngCore;

/// Below this many observations the estimate carries a warning.
pub const MIN_RELIABLE_N: usize = 30;

/// `|rho|` at or above this is treated as perfect correlation.
pub const DEGENERATE_RHO: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EstimateOptions {
    /// Bootstrap resamples; zero skips the standard errors.
    pub resamples: usize,
    pub seed: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            resamples: 1000,
            seed: 0,
        }
    }
}

/// Bootstrap standard deviations of each estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardErrors {
    pub mu_h: f64,
    pub sigma_h: f64,
    pub mu: f64,
    pub sigma: f64,
    pub rho: f64,
    pub m_hat: f64,
    pub m_hat_plugin: f64,
    /// Resamples with non-zero variance in both columns.
    pub resamples_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatedModel {
    pub n: usize,
    pub model: SecurityModel,
    /// `mean(r) / mean(h* r)` on the standardized, sign-aligned indicator.
    pub m_hat: f64,
    /// `mu / (rho sigma)` from the sample moments.
    pub m_hat_plugin: f64,
    /// `-m_hat`, on the standardized indicator.
    pub threshold_hat: f64,
    pub near_degenerate: bool,
    pub standard_errors: Option<StandardErrors>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    mu_h: f64,
    sigma_h: f64,
    mu: f64,
    sigma: f64,
    rho: f64,
    m_hat: f64,
    m_hat_plugin: f64,
}

// Two passes over the observations selected by `idx`.
fn point_estimate(h: &[f64], r: &[f64], idx: impl Iterator<Item = usize> + Clone) -> Result<Point> {
    let n = h.len() as f64;
    let (mut sh, mut sr) = (0.0, 0.0);
    for i in idx.clone() {
        sh += h[i];
        sr += r[i];
    }
    let (mh, mr) = (sh / n, sr / n);
    let (mut shh, mut srr, mut shr, mut s_dev_r) = (0.0, 0.0, 0.0, 0.0);
    for i in idx {
        let (dh, dr) = (h[i] - mh, r[i] - mr);
        shh += dh * dh;
        srr += dr * dr;
        shr += dh * dr;
        s_dev_r += dh * r[i];
    }
    if shh <= 0.0 {
        return Err(Error::ZeroVariance("indicator"));
    }
    if srr <= 0.0 {
        return Err(Error::ZeroVariance("return"));
    }
    let sigma_h = (shh / (n - 1.0)).sqrt();
    let sigma = (srr / (n - 1.0)).sqrt();
    let rho = (shr / (shh * srr).sqrt()).clamp(-1.0, 1.0);
    let sign = if rho < 0.0 { -1.0 } else { 1.0 };
    let mean_hstar_r = sign * s_dev_r / (n * sigma_h);
    Ok(Point {
        mu_h: mh,
        sigma_h,
        mu: mr,
        sigma,
        rho,
        m_hat: mr / mean_hstar_r,
        m_hat_plugin: mr / (rho.abs() * sigma),
    })
}

/// Sample moments, both m-ratio estimators and bootstrap standard errors.
///
/// The m-ratio is reported on the standardized indicator, flipped when the
/// sample correlation is negative, so that `threshold_hat` applies to
/// `H* = sign(rho) (H - mu_H) / sigma_H`.
pub fn estimate_model(data: &Dataset, opts: &EstimateOptions) -> Result<EstimatedModel> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewObservations { required: 2, got: n });
    }
    let (h, r) = (data.h(), data.r());
    let p = point_estimate(h, r, 0..n)?;
    let model = SecurityModel::new(p.mu_h, p.sigma_h, p.mu, p.sigma, p.rho)?;
    let mut warnings = Vec::new();
    if n < MIN_RELIABLE_N {
        warnings.push(format!(
            "only {n} observations; at least {MIN_RELIABLE_N} are needed for reliable estimates"
        ));
    }
    let near_degenerate = p.rho.abs() >= DEGENERATE_RHO;
    if near_degenerate {
        warnings.push("sample correlation is (numerically) +/-1".into());
    }
    let standard_errors = if opts.resamples > 0 {
        bootstrap(h, r, opts)
    } else {
        None
    };
    Ok(EstimatedModel {
        n,
        model,
        m_hat: p.m_hat,
        m_hat_plugin: p.m_hat_plugin,
        threshold_hat: -p.m_hat,
        near_degenerate,
        standard_errors,
        warnings,
    })
}

// Resample `b` draws its indices from stream `b` of the seed, so results do
// not depend on scheduling.
fn bootstrap(h: &[f64], r: &[f64], opts: &EstimateOptions) -> Option<StandardErrors> {
    let n = h.len();
    let points: Vec<Point> = (0..opts.resamples as u64)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = McConfig {
                seed: opts.seed,
                stream: b,
                n_samples: n as u64,
            }
            .rng_at(0);
            // Multiply-shift maps a 64-bit word onto 0..n.
            let idx: Vec<usize> = (0..n)
                .map(|_| ((u128::from(rng.next_u64()) * n as u128) >> 64) as usize)
                .collect();
            point_estimate(h, r, idx.iter().copied()).ok()
        })
        .collect();
    if points.len() < 2 {
        return None;
    }
    let sd = |f: fn(&Point) -> f64| {
        let vals: Vec<f64> = points.iter().map(f).filter(|v| v.is_finite()).collect();
        let k = vals.len() as f64;
        if vals.len() < 2 {
            return f64::NAN;
        }
        let mean = vals.iter().sum::<f64>() / k;
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    };
    Some(StandardErrors {
        mu_h: sd(|p| p.mu_h),
        sigma_h: sd(|p| p.sigma_h),
        mu: sd(|p| p.mu),
        sigma: sd(|p| p.sigma),
        rho: sd(|p| p.rho),
        m_hat: sd(|p| p.m_hat),
        m_hat_plugin: sd(|p| p.m_hat_plugin),
        resamples_used: points.len(),
    })
}

/// Least-squares combination of several indicators into one.
#[derive(Debug, Clone, Serialize)]
pub struct Reduction {
    /// Pairs of (fitted value, return).
    #[serde(skip)]
    pub dataset: Dataset,
    /// `intercept` followed by the indicator names.
    pub names: Vec<String>,
    pub weights: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub r_squared: f64,
}

/// Regresses `r` on `(1, h1, ..., hk)` and uses the fitted value as the
/// combined indicator.
pub fn reduce_indicators(multi: &MultiDataset) -> Result<Reduction> {
    let (n, k) = (multi.len(), multi.k());
    let p = k + 1;
    if n <= p {
        return Err(Error::TooFewObservations {
            required: p + 1,
            got: n,
        });
    }
    let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { multi.row(i)[j - 1] });
    let y = DVector::from_column_slice(multi.r());
    let mut names = vec!["intercept".to_string()];
    names.extend(multi.names().iter().cloned());

    let qr = x.clone().qr();
    let rmat = qr.r();
    // Singular values of R are those of the design matrix.
    let svd = rmat.clone().svd(false, true);
    let sv = &svd.singular_values;
    let (imin, smin) =
        sv.iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |a, (i, s)| if s < a.1 { (i, s) } else { a });
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if !(smin > 1e-10 * smax) {
        let v = svd.v_t.as_ref().expect("requested").row(imin).transpose();
        let vmax = v.amax();
        let columns = names
            .iter()
            .zip(v.iter())
            .filter(|(_, c)| c.abs() > 1e-3 * vmax)
            .map(|(name, _)| name.clone())
            .collect();
        return Err(Error::RankDeficient { columns });
    }

    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, p).into_owned();
    let beta = rmat
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient { columns: names.clone() })?;
    let fitted = &x * &beta;
    let resid = &y - &fitted;
    let rss = resid.norm_squared();
    let ybar = y.mean();
    let tss = y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>();
    let s2 = rss / (n - p) as f64;
    let rinv = rmat
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::RankDeficient { columns: names.clone() })?;
    let cov = &rinv * rinv.transpose() * s2;
    let standard_errors = (0..p).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    Ok(Reduction {
        dataset: Dataset::new(fitted.iter().copied().collect(), multi.r().to_vec())?,
        names,
        weights: beta.iter().copied().collect(),
        standard_errors,
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 0.0 },
    })
}

/// Trailing `lookback`-period return as the indicator for the following
/// period's simple return.
pub fn momentum_indicator(prices: &PriceSeries, lookback: usize) -> Result<Dataset> {
    if lookback == 0 {
        return Err(Error::InvalidParameter {
            name: "lookback",
            value: 0.0,
            reason: "must be at least one period",
        });
    }
    let p = &prices.prices;
    if p.len() != prices.dates.len() {
        return Err(Error::InvalidParameter {
            name: "prices",
            value: p.len() as f64,
            reason: "dates and prices differ in length",
        });
    }
    for (i, &v) in p.iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Data {
                line: i as u64 + 2,
                message: format!("price must be positive, got {v}"),
            });
        }
    }
    if let Some(i) = prices.dates.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Data {
            line: i as u64 + 3,
            message: format!(
                "dates must be strictly increasing ({} after {})",
                prices.dates[i + 1],
                prices.dates[i]
            ),
        });
    }
    if p.len() <= lookback + 1 {
        return Err(Error::TooFewObservations {
            required: lookback + 2,
            got: p.len(),
        });
    }
    let (h, r) = (lookback..p.len() - 1)
        .map(|t| (p[t] / p[t - lookback] - 1.0, p[t + 1] / p[t] - 1.0))
        .unzip();
    Dataset::new(h, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::read_prices;
    use crate::mc::sample_pairs;

    fn synthetic(mu: f64, sigma: f64, rho: f64, n: u64, seed: u64) -> Dataset {
        let model = SecurityModel::standardized(mu, sigma, rho).unwrap();
        Dataset::from_pairs(sample_pairs(&model, &McConfig::new(seed, 0, n).unwrap())).unwrap()
    }

    #[test]
    fn recovers_m_ratio() {
        let data = synthetic(0.01, 0.05, 0.3, 100_000, 7);
        let est = estimate_model(
            &data,
            &EstimateOptions {
                resamples: 200,
                seed: 1,
            },
        )
        .unwrap();
        let se = est.standard_errors.unwrap();
        assert!((est.m_hat - 2.0 / 3.0).abs() < 3.0 * se.m_hat, "{est:?}");
        assert!((est.m_hat_plugin - 2.0 / 3.0).abs() < 3.0 * se.m_hat_plugin);
        assert_eq!(est.threshold_hat, -est.m_hat);
        assert!(est.warnings.is_empty());
    }

    #[test]
    fn bootstrap_is_reproducible() {
        let data = synthetic(0.01, 0.05, 0.3, 1000, 3);
        let opts = EstimateOptions { resamples: 50, seed: 9 };
        assert_eq!(
            estimate_model(&data, &opts).unwrap(),
            estimate_model(&data, &opts).unwrap()
        );
    }

    #[test]
    fn degenerate_inputs() {
        let two = Dataset::from_pairs([(-1.0, -1.0), (1.0, 1.0)]).unwrap();
        let est = estimate_model(&two, &EstimateOptions::default()).unwrap();
        assert_eq!(est.model.rho, 1.0);
        assert_eq!(est.model.mu, 0.0);
        assert!(est.near_degenerate);
        assert_eq!(est.warnings.len(), 2);

        let same = Dataset::from_pairs((0..100).map(|i| (i as f64 * 0.37).sin()).map(|x| (x, x))).unwrap();
        assert!(
            estimate_model(&same, &EstimateOptions::default())
                .unwrap()
                .near_degenerate
        );

        let flat = Dataset::from_pairs([(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]).unwrap();
        assert_eq!(
            estimate_model(&flat, &EstimateOptions::default()).unwrap_err(),
            Error::ZeroVariance("return")
        );
        let one = Dataset::from_pairs([(1.0, 0.0)]).unwrap();
        assert!(estimate_model(&one, &EstimateOptions::default()).is_err());
    }

    #[test]
    fn negative_correlation_flips_indicator() {
        let model = SecurityModel::new(2.0, 3.0, 0.01, 0.05, -0.4).unwrap();
        let data = Dataset::from_pairs(sample_pairs(&model, &McConfig::new(5, 0, 200_000).unwrap())).unwrap();
        let est = estimate_model(&data, &EstimateOptions { resamples: 0, seed: 0 }).unwrap();
        assert!(est.model.rho < 0.0);
        assert!((est.m_hat - 0.5).abs() < 0.1, "{}", est.m_hat);
    }

    fn multi(rows: Vec<Vec<f64>>, r: Vec<f64>, k: usize) -> MultiDataset {
        MultiDataset::new((1..=k).map(|j| format!("h{j}")).collect(), rows, r).unwrap()
    }

    #[test]
    fn regression_recovers_weights() {
        let n = 20_000u64;
        let cfg = McConfig::new(11, 0, n).unwrap();
        let mut rng = cfg.rng_at(0);
        let (mut rows, mut r) = (Vec::new(), Vec::new());
        for _ in 0..n {
            let (a, b) = crate::mc::normal_pair(&mut rng);
            let (e, _) = crate::mc::normal_pair(&mut rng);
            rows.push(vec![a, b]);
            r.push(0.1 + 0.3 * a + 0.2 * b + e);
        }
        let m = multi(rows, r, 2);
        let red = reduce_indicators(&m).unwrap();
        for (w, (truth, se)) in red.weights.iter().zip([0.1, 0.3, 0.2].iter().zip(&red.standard_errors)) {
            assert!((w - truth).abs() < 3.0 * se, "{w} vs {truth} (se {se})");
        }
        let corr = |d: &Dataset| {
            estimate_model(d, &EstimateOptions { resamples: 0, seed: 0 })
                .unwrap()
                .model
                .rho
        };
        let c0 = corr(&red.dataset);
        assert!(c0 >= corr(&m.column(0).unwrap()) - 1e-3);
        assert!(c0 >= corr(&m.column(1).unwrap()) - 1e-3);
    }

    #[test]
    fn duplicated_column_is_rank_deficient() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, i as f64]).collect();
        let r = (0..50).map(|i| (i as f64).cos()).collect();
        match reduce_indicators(&multi(rows, r, 2)).unwrap_err() {
            Error::RankDeficient { columns } => assert_eq!(columns, ["h1", "h2"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_indicator_reduction_keeps_decisions() {
        let data = synthetic(0.01, 0.05, 0.3, 5000, 21);
        let m = multi(data.h().iter().map(|&h| vec![h]).collect(), data.r().to_vec(), 1);
        let red = reduce_indicators(&m).unwrap();
        let opts = EstimateOptions { resamples: 0, seed: 0 };
        let (a, b) = (
            estimate_model(&data, &opts).unwrap(),
            estimate_model(&red.dataset, &opts).unwrap(),
        );
        let trade = |e: &EstimatedModel, h: f64| {
            let s = e.model.standardize();
            (s.to_standard(h) - e.threshold_hat).signum()
        };
        for (h, h0) in data.h().iter().zip(red.dataset.h()) {
            assert_eq!(trade(&a, *h), trade(&b, *h0));
        }
    }

    #[test]
    fn momentum_examples() {
        let prices = read_prices("date,price\n2020-01-01,100\n2020-02-01,110\n2020-03-01,121\n".as_bytes()).unwrap();
        let d = momentum_indicator(&prices, 1).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d.h()[0] - 0.1).abs() < 1e-12 && (d.r()[0] - 0.1).abs() < 1e-12);

        let flat = PriceSeries {
            dates: (0..20)
                .map(|i| chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap() + chrono::Days::new(i))
                .collect(),
            prices: vec![50.0; 20],
        };
        let d = momentum_indicator(&flat, 3).unwrap();
        assert!(d.pairs().all(|(h, r)| h == 0.0 && r == 0.0));
        assert_eq!(d.len(), 16);

        let mut bad = flat.clone();
        bad.prices[4] = 0.0;
        assert!(momentum_indicator(&bad, 3).is_err());
        let mut unsorted = flat.clone();
        unsorted.dates.swap(2, 3);
        assert!(momentum_indicator(&unsorted, 3).is_err());
        assert!(momentum_indicator(&flat, 19).is_err());
    }

    #[test]
    fn random_walk_momentum_is_uncorrelated() {
        let cfg = McConfig::new(99, 0, 10_000).unwrap();
        let mut rng = cfg.rng_at(0);
        let mut p = 100.0;
        let start = chrono::NaiveDate::from_ymd_opt(1900, 1, 1).unwrap();
        let (mut dates, mut prices) = (Vec::new(), Vec::new());
        for i in 0..10_000u64 {
            dates.push(start + chrono::Days::new(i));
            prices.push(p);
            p *= (0.005 + 0.04 * crate::mc::normal_pair(&mut rng).0).exp();
        }
        let d = momentum_indicator(&PriceSeries { dates, prices }, 12).unwrap();
        let est = estimate_model(
            &d,
            &EstimateOptions {
                resamples: 200,
                seed: 4,
            },
        )
        .unwrap();
        let se = est.standard_errors.unwrap().rho;
        assert!(est.model.rho.abs() < 3.0 * se, "{} vs {se}", est.model.rho);
    }
}
