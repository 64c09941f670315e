//! Seeded Monte Carlo evaluation of strategies under the bivariate normal
//! model.
//!
//! Sample `i` of `(seed, stream)` is drawn from the ChaCha8 keystream at word
//! offset `4 i`, so any sub-range of samples can be regenerated on its own.
//! Work is cut into fixed-size chunks whose accumulators are merged in chunk
//! order; results therefore do not depend on the number of threads.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::max_er::max_expected_return;
use crate::max_ir::ir_solution;
use crate::model::{SecurityModel, Standardization};
use crate::normal_math::QuadratureSpec;
use crate::notional::Notional;

const CHUNK: u64 = 1 << 16;
const WORDS_PER_SAMPLE: u128 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub seed: u64,
    pub stream: u64,
    pub n_samples: u64,
}

impl McConfig {
    pub fn new(seed: u64, stream: u64, n_samples: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::InvalidParameter {
                name: "n_samples",
                value: 0.0,
                reason: "at least one sample is required",
            });
        }
        Ok(Self {
            seed,
            stream,
            n_samples,
        })
    }

    /// Generator positioned at the first word of sample `index`.
    pub fn rng_at(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(u128::from(index) * WORDS_PER_SAMPLE);
        rng
    }
}

/// One pair of independent standard normals (Box-Muller, two words each).
#[inline]
pub fn normal_pair(rng: &mut impl RngCore) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 in (0, 1] keeps the logarithm finite.
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    let r = (-2.0 * libm::log(u1)).sqrt();
    let (s, c) = (libm::sin(TAU * u2), libm::cos(TAU * u2));
    (r * c, r * s)
}

/// Iterator over `(h, r)` draws for samples `start..end`.
pub struct Samples {
    rng: ChaCha8Rng,
    model: SecurityModel,
    resid: f64,
    remaining: u64,
}

impl Iterator for Samples {
    type Item = (f64, f64);

    #[inline]
    fn next(&mut self) -> Option<(f64, f64)> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let (z1, z2) = normal_pair(&mut self.rng);
        let m = &self.model;
        let h = m.mu_h + m.sigma_h * z1;
        let r = m.mu + m.sigma * (m.rho * z1 + self.resid * z2);
        Some((h, r))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

impl ExactSizeIterator for Samples {}

fn samples_range(model: &SecurityModel, cfg: &McConfig, start: u64, end: u64) -> Samples {
    Samples {
        rng: cfg.rng_at(start),
        model: *model,
        resid: (1.0 - model.rho * model.rho).max(0.0).sqrt(),
        remaining: end.saturating_sub(start),
    }
}

/// All `cfg.n_samples` draws of `(h, r)` in order.
pub fn sample_pairs(model: &SecurityModel, cfg: &McConfig) -> Samples {
    samples_range(model, cfg, 0, cfg.n_samples)
}

/// Materializes the draws as a [`Dataset`].
pub fn simulate_dataset(model: &SecurityModel, cfg: &McConfig) -> Result<Dataset> {
    Dataset::from_pairs(sample_pairs(model, cfg))
}

/// Streaming central moments up to order four plus a count of non-negative
/// observations. Merging follows Pébay (2008).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
    non_negative: u64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
        if x >= 0.0 {
            self.non_negative += 1;
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let d4 = d2 * d2;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 =
            self.m3 + other.m3 + d3 * na * nb * (na - nb) / (n * n) + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        self.n += other.n;
        self.mean = mean;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
        self.non_negative += other.non_negative;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn result(&self) -> McResult {
        let n = self.n as f64;
        let var = self.variance();
        let sd = var.sqrt();
        // Population moments for the delta-method standard errors.
        let (mu2, mu3, mu4) = (self.m2 / n, self.m3 / n, self.m4 / n);
        let ir = if sd > 0.0 { self.mean / sd } else { 0.0 };
        let (se_sd, se_ir) = if mu2 > 0.0 {
            let skew = mu3 / mu2.powf(1.5);
            let kurt = mu4 / (mu2 * mu2);
            let se_sd = ((mu4 - mu2 * mu2).max(0.0) / (4.0 * mu2 * n)).sqrt();
            let v_ir = (1.0 - skew * ir + (kurt - 1.0) / 4.0 * ir * ir).max(0.0) / n;
            (se_sd, v_ir.sqrt())
        } else {
            (0.0, 0.0)
        };
        let hit = self.non_negative as f64 / n;
        let m = self.mean;
        let second = mu2 + m * m;
        let fourth = mu4 + 4.0 * mu3 * m + 6.0 * mu2 * m * m + m.powi(4);
        McResult {
            n: self.n,
            mean: self.mean,
            std_dev: sd,
            information_ratio: ir,
            hit_rate: hit,
            second_moment: second,
            se_mean: sd / n.sqrt(),
            se_std_dev: se_sd,
            se_information_ratio: se_ir,
            se_hit_rate: (hit * (1.0 - hit) / n).sqrt(),
            se_second_moment: ((fourth - second * second).max(0.0) / n).sqrt(),
        }
    }
}

/// Sample statistics of a strategy return `Q` with delta-method standard
/// errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub n: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub information_ratio: f64,
    /// Fraction of draws with `Q >= 0`.
    pub hit_rate: f64,
    pub second_moment: f64,
    pub se_mean: f64,
    pub se_std_dev: f64,
    pub se_information_ratio: f64,
    pub se_hit_rate: f64,
    pub se_second_moment: f64,
}

/// Runs `step` over every sample in fixed chunks (in parallel) and folds the
/// chunk accumulators in order.
fn fold_chunks<A, I, S, M>(model: &SecurityModel, cfg: &McConfig, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, f64, f64) + Sync,
    M: Fn(&mut A, &A),
{
    let chunks = cfg.n_samples.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(cfg.n_samples);
            let mut acc = init();
            for (h, r) in samples_range(model, cfg, start, end) {
                step(&mut acc, h, r);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in &parts {
        merge(&mut total, p);
    }
    total
}

/// Statistics of `Q = f(H*) R`, where the notional reads the standardized
/// (and, for negative correlation, sign-flipped) indicator `H*`.
pub fn evaluate_strategy<N: Notional + ?Sized>(notional: &N, model: &SecurityModel, cfg: &McConfig) -> McResult {
    let map = model.standardize();
    fold_chunks(
        model,
        cfg,
        Moments::default,
        |acc, h, r| acc.push(notional.value(map.to_standard(h)) * r),
        |a, b| a.merge(b),
    )
    .result()
}

/// Same draws as [`evaluate_strategy`], accumulated in one sequential pass.
pub fn evaluate_strategy_serial<N: Notional + ?Sized>(notional: &N, model: &SecurityModel, cfg: &McConfig) -> McResult {
    evaluate_strategy_partitioned(notional, model, cfg, 1)
}

/// Same draws as [`evaluate_strategy`], split into `parts` contiguous counter
/// ranges that are accumulated independently and then merged.
pub fn evaluate_strategy_partitioned<N: Notional + ?Sized>(
    notional: &N,
    model: &SecurityModel,
    cfg: &McConfig,
    parts: u64,
) -> McResult {
    let map = model.standardize();
    let parts = parts.clamp(1, cfg.n_samples);
    let accs: Vec<Moments> = (0..parts)
        .into_par_iter()
        .map(|k| {
            let start = cfg.n_samples * k / parts;
            let end = cfg.n_samples * (k + 1) / parts;
            let mut acc = Moments::default();
            for (h, r) in samples_range(model, cfg, start, end) {
                acc.push(notional.value(map.to_standard(h)) * r);
            }
            acc
        })
        .collect();
    let mut total = Moments::default();
    for a in &accs {
        total.merge(a);
    }
    total.result()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    /// Estimate of `E((f + eps 1_I) R) - E(f R)`.
    pub delta_mean: f64,
    pub se: f64,
    /// Fraction of draws whose indicator fell in the interval.
    pub coverage: f64,
}

/// Paired (common random numbers) estimate of the change in expected return
/// when `epsilon` is added to `base` on `[lo, hi]` of the standardized
/// indicator. The bumped notional is clamped to `[-1, 1]`.
pub fn perturbation_test<N: Notional + ?Sized>(
    model: &SecurityModel,
    base: &N,
    interval: (f64, f64),
    epsilon: f64,
    cfg: &McConfig,
) -> Result<Perturbation> {
    let (lo, hi) = interval;
    if !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "interval",
            value: hi - lo,
            reason: "interval must satisfy lo < hi",
        });
    }
    crate::error::finite("epsilon", epsilon)?;
    let map = model.standardize();
    let (acc, inside) = fold_chunks(
        model,
        cfg,
        || (Moments::default(), 0u64),
        |(acc, inside), h, r| {
            let z = map.to_standard(h);
            let d = if (lo..=hi).contains(&z) {
                *inside += 1;
                let f = base.value(z);
                ((f + epsilon).clamp(-1.0, 1.0) - f) * r
            } else {
                0.0
            };
            acc.push(d);
        },
        |(a, ia), (b, ib)| {
            a.merge(b);
            *ia += ib;
        },
    );
    let res = acc.result();
    Ok(Perturbation {
        delta_mean: res.mean,
        se: res.se_mean,
        coverage: inside as f64 / cfg.n_samples as f64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceRow {
    pub index: usize,
    pub result: McResult,
    /// `mean <= M + 4 SE`.
    pub mean_ok: bool,
    /// `IR <= max IR + 4 SE`.
    pub ir_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    pub max_expected_return: f64,
    pub max_information_ratio: f64,
    pub rows: Vec<DominanceRow>,
    pub best_mean: usize,
    pub best_information_ratio: usize,
}

impl DominanceReport {
    pub fn violations(&self) -> (usize, usize) {
        let mean = self.rows.iter().filter(|r| !r.mean_ok).count();
        let ir = self.rows.iter().filter(|r| !r.ir_ok).count();
        (mean, ir)
    }
}

/// Evaluates every candidate on the same draws and checks each against the
/// closed-form maxima of the expected return and the information ratio.
pub fn dominance_sweep<N: Notional>(
    model: &SecurityModel,
    candidates: &[N],
    cfg: &McConfig,
) -> Result<DominanceReport> {
    if candidates.is_empty() {
        return Err(Error::Empty("no candidate notionals"));
    }
    let map: Standardization = model.standardize();
    let std = map.model;
    let max_mean = max_expected_return(&std);
    let max_ir = if std.rho() == 0.0 {
        std.omega().abs()
    } else if std.rho() >= 1.0 {
        f64::INFINITY
    } else {
        ir_solution(&std, &QuadratureSpec::default())?.max_ir
    };
    let k = candidates.len();
    let accs = fold_chunks(
        model,
        cfg,
        || vec![Moments::default(); k],
        |accs, h, r| {
            let z = map.to_standard(h);
            for (acc, f) in accs.iter_mut().zip(candidates) {
                acc.push(f.value(z) * r);
            }
        },
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| x.merge(y)),
    );
    let rows: Vec<DominanceRow> = accs
        .iter()
        .enumerate()
        .map(|(index, acc)| {
            let result = acc.result();
            DominanceRow {
                index,
                result,
                mean_ok: result.mean <= max_mean + 4.0 * result.se_mean,
                ir_ok: result.information_ratio <= max_ir + 4.0 * result.se_information_ratio,
            }
        })
        .collect();
    let argmax = |key: fn(&McResult) -> f64| {
        rows.iter().fold(0, |best, r| {
            if key(&r.result) > key(&rows[best].result) {
                r.index
            } else {
                best
            }
        })
    };
    Ok(DominanceReport {
        max_expected_return: max_mean,
        max_information_ratio: max_ir,
        best_mean: argmax(|r| r.mean),
        best_information_ratio: argmax(|r| r.information_ratio),
        rows,
    })
}
