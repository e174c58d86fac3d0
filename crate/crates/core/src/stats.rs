//! Goodness-of-fit tests: Kolmogorov–Smirnov (one and two sample), Poisson
//! interval counts, the Hill tail-index estimator and paired z-scores.
//!
//! Critical values are asymptotic.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::PointSample;

/// Asymptotic Kolmogorov quantiles `c(α)` with `P(K > c) = α`.
pub const KS_C_01: f64 = 1.627_6;
pub const KS_C_05: f64 = 1.358_1;
/// Two-sided standard normal quantiles.
pub const Z_01: f64 = 2.575_8;
pub const Z_05: f64 = 1.959_96;

pub const MIN_KS_SAMPLE: usize = 20;
pub const MIN_HILL_EXCEEDANCES: usize = 20;

/// Outcome of one test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub test: String,
    pub statistic: f64,
    pub sample_size: usize,
    pub critical_01: f64,
    pub critical_05: f64,
    pub pass_01: bool,
    pub pass_05: bool,
    /// Test-specific auxiliary numbers.
    #[serde(default)]
    pub details: BTreeMap<String, f64>,
}

impl GofReport {
    fn new(test: impl Into<String>, statistic: f64, sample_size: usize, critical_01: f64, critical_05: f64) -> Self {
        Self {
            test: test.into(),
            statistic,
            sample_size,
            critical_01,
            critical_05,
            pass_01: statistic < critical_01,
            pass_05: statistic < critical_05,
            details: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

/// Closed-form reference distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// Standard Gumbel, `exp(−e^{−x})`.
    Gumbel,
    /// Unit exponential.
    Exponential,
    /// Uniform on `[0, 1]`.
    Uniform,
}

impl Reference {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Reference::Gumbel => (-(-x).exp()).exp(),
            Reference::Exponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
            Reference::Uniform => x.clamp(0.0, 1.0),
        }
    }
}

impl FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gumbel" => Ok(Reference::Gumbel),
            "exponential" | "exp" => Ok(Reference::Exponential),
            "uniform" => Ok(Reference::Uniform),
            _ => Err(Error::UnknownReference(s.to_string())),
        }
    }
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reference::Gumbel => "gumbel",
            Reference::Exponential => "exponential",
            Reference::Uniform => "uniform",
        })
    }
}

fn sorted(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("sample contains NaN".into()));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup_x |F_n(x) − F(x)|` for a continuous `cdf`.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let v = sorted(sample)?;
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    }))
}

/// One-sample KS test against a named reference.
pub fn ks_test(sample: &[f64], reference: Reference) -> Result<GofReport> {
    ks_test_cdf(sample, |x| reference.cdf(x), &format!("ks-{reference}"))
}

pub fn ks_test_cdf(sample: &[f64], cdf: impl Fn(f64) -> f64, name: &str) -> Result<GofReport> {
    let n = sample.len();
    if n < MIN_KS_SAMPLE {
        return Err(Error::TooFewObservations {
            got: n,
            need: MIN_KS_SAMPLE,
        });
    }
    let d = ks_distance(sample, cdf)?;
    let s = (n as f64).sqrt();
    Ok(GofReport::new(name, d, n, KS_C_01 / s, KS_C_05 / s))
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<GofReport> {
    for s in [a, b] {
        if s.len() < MIN_KS_SAMPLE {
            return Err(Error::TooFewObservations {
                got: s.len(),
                need: MIN_KS_SAMPLE,
            });
        }
    }
    let (x, y) = (sorted(a)?, sorted(b)?);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0_f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let scale = ((n + m) / (n * m)).sqrt();
    Ok(GofReport::new("ks-two-sample", d, x.len() + y.len(), KS_C_01 * scale, KS_C_05 * scale)
        .with("n_a", n)
        .with("n_b", m))
}

/// Compares counts of points in `[a, b]` across samples with a Poisson law of
/// mean `e^{−a} − e^{−b}` through z-scores for the mean and the variance.
/// The statistic is the larger absolute z-score.
pub fn poisson_interval_counts(samples: &[PointSample], a: f64, b: f64) -> Result<GofReport> {
    if !(b > a) {
        return Err(Error::InvalidArgument(format!("interval needs b > a, got [{a}, {b}]")));
    }
    if samples.len() < 2 {
        return Err(Error::TooFewObservations {
            got: samples.len(),
            need: 2,
        });
    }
    for s in samples {
        match s.truncation.resolved_level() {
            Some(level) if level <= a => {}
            Some(level) => return Err(Error::ShallowTruncation { resolved: level, start: a }),
            None => {
                return Err(Error::ShallowTruncation {
                    resolved: f64::INFINITY,
                    start: a,
                })
            }
        }
    }
    let lambda = (-a).exp() - (-b).exp();
    let counts: Vec<f64> = samples.iter().map(|s| s.count_in(a, b) as f64).collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let z_mean = (mean - lambda) / (lambda / n).sqrt();
    let z_var = (var - lambda) / ((lambda + 2.0 * lambda * lambda) / n).sqrt();
    Ok(GofReport::new("poisson-counts", z_mean.abs().max(z_var.abs()), counts.len(), Z_01, Z_05)
        .with("lambda", lambda)
        .with("mean", mean)
        .with("variance", var)
        .with("z_mean", z_mean)
        .with("z_var", z_var))
}

/// Hill estimate of the tail index `α` in `P(X > x) ~ x^{−α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillEstimate {
    pub alpha: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Number of upper order statistics used.
    pub k: usize,
    /// Estimate from the top `k/4` order statistics.
    pub alpha_quarter: f64,
    /// The two estimates differ by more than three standard errors, a sign
    /// that the tail is not regularly varying.
    pub drift: bool,
}

fn hill_from_sorted_logs(desc: &[f64], k: usize) -> f64 {
    let threshold = desc[k];
    let mean = desc[..k].iter().map(|l| l - threshold).sum::<f64>() / k as f64;
    1.0 / mean
}

/// Hill estimator over the top `⌊top_fraction · n⌋` values.
pub fn hill_tail_index(values: &[f64], top_fraction: f64) -> Result<HillEstimate> {
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("Hill estimator needs positive values".into()));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    hill_tail_index_log(&logs, top_fraction)
}

/// [`hill_tail_index`] for values given by their logarithms.
pub fn hill_tail_index_log(log_values: &[f64], top_fraction: f64) -> Result<HillEstimate> {
    if !(top_fraction > 0.0 && top_fraction <= 0.5) {
        return Err(Error::Domain {
            what: "top_fraction",
            value: top_fraction,
            domain: "(0, 0.5]",
        });
    }
    if log_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in Hill input".into()));
    }
    let k = (top_fraction * log_values.len() as f64).floor() as usize;
    if k < MIN_HILL_EXCEEDANCES || k >= log_values.len() {
        return Err(Error::TooFewObservations {
            got: k,
            need: MIN_HILL_EXCEEDANCES,
        });
    }
    let mut desc = log_values.to_vec();
    desc.sort_by(|a, b| b.total_cmp(a));
    let alpha = hill_from_sorted_logs(&desc, k);
    let half = Z_05 * alpha / (k as f64).sqrt();
    let kq = (k / 4).max(1);
    let alpha_quarter = hill_from_sorted_logs(&desc, kq);
    let se_diff = alpha * (4.0 / k as f64 - 1.0 / k as f64).sqrt();
    Ok(HillEstimate {
        alpha,
        ci_low: alpha - half,
        ci_high: alpha + half,
        k,
        alpha_quarter,
        drift: (alpha_quarter - alpha).abs() > 3.0 * se_diff,
    })
}

/// `mean(d) / (sd(d)/√n)` for paired differences; `0` when every
/// difference vanishes.
pub fn paired_z(diffs: &[f64]) -> f64 {
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        if mean == 0.0 {
            0.0
        } else {
            mean.signum() * f64::INFINITY
        }
    } else {
        mean / (var / n).sqrt()
    }
}

/// One-sample z-score of the mean against `expected`.
pub fn mean_z(sample: &[f64], expected: f64) -> f64 {
    paired_z(&sample.iter().map(|x| x - expected).collect::<Vec<_>>())
}
