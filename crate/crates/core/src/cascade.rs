//! Poisson point processes with intensity `e^{−x} dx` and their nested
//! cascades.
//!
//! Every node of a cascade owns an independent stream keyed by
//! `(seed, level, parent index)`, and its points are `−log Γ_i` with `Γ_i`
//! the partial sums of unit exponentials. The first-level node of a cascade
//! uses the same stream as [`sample_ppp_exp`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::log_sum_exp;
use crate::points::{PointSample, Truncation};
use crate::rng::{unit_exponential, CounterRng, Domain};

pub const DEFAULT_TOP_K: usize = 64;
pub const DEFAULT_TUPLE_CAP: usize = 1 << 24;

/// Share of the partition integral carried by the last kept first-level
/// point above which the truncation is flagged.
pub const TAIL_THRESHOLD: f64 = 1e-3;

fn node_points(seed: u64, level: usize, parent: u64, k: usize, out: &mut Vec<f64>) {
    let mut rng = CounterRng::at(Domain::Cascade, seed, level as u64, parent);
    let mut gamma = 0.0;
    for _ in 0..k {
        gamma += unit_exponential(&mut rng);
        out.push(-gamma.ln());
    }
}

/// The `k` largest points of a PPP(`e^{−x} dx`).
pub fn sample_ppp_exp(seed: u64, k: usize) -> Result<PointSample> {
    if k == 0 {
        return Err(Error::InvalidArgument("top count K must be >= 1".into()));
    }
    let mut points = Vec::with_capacity(k);
    node_points(seed, 1, 0, k, &mut points);
    let level = *points.last().unwrap();
    PointSample::new(points, Truncation::Level { level }, format!("PPP(exp(-x)) top {k}, seed {seed}"))
}

/// Truncated Ruelle cascade: each node keeps its `k` largest points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeSample {
    pub seed: u64,
    pub m: usize,
    pub k: usize,
    /// `levels[l]` holds `k^{l+1}` points; the children of node `p` on level
    /// `l` occupy `levels[l][p·k .. (p+1)·k]`, in descending order.
    levels: Vec<Vec<f64>>,
}

impl CascadeSample {
    pub fn level(&self, l: usize) -> &[f64] {
        &self.levels[l]
    }

    pub fn num_tuples(&self) -> usize {
        self.levels[self.m - 1].len()
    }

    /// Index path `(α_1, …, α_m)` and points `(e_1, …, e_m)` of tuple `i`,
    /// where tuples are numbered lexicographically.
    pub fn tuple(&self, i: usize) -> (Vec<usize>, Vec<f64>) {
        let mut path = vec![0; self.m];
        let mut rest = i;
        for l in (0..self.m).rev() {
            path[l] = rest % self.k;
            rest /= self.k;
        }
        let mut node = 0usize;
        let points = path
            .iter()
            .enumerate()
            .map(|(l, &a)| {
                node = node * self.k + a;
                self.levels[l][node]
            })
            .collect();
        (path, points)
    }

    /// Visits `Σ_l γ_l e_l` for every tuple in lexicographic order.
    fn for_each_energy(&self, gamma: &[f64], mut f: impl FnMut(usize, f64)) {
        fn walk(cs: &CascadeSample, gamma: &[f64], l: usize, node: usize, acc: f64, f: &mut dyn FnMut(usize, f64)) {
            let base = node * cs.k;
            for i in 0..cs.k {
                let e = acc + gamma[l] * cs.levels[l][base + i];
                if l + 1 == cs.m {
                    f(base + i, e);
                } else {
                    walk(cs, gamma, l + 1, base + i, e, f);
                }
            }
        }
        walk(self, gamma, 0, 0, 0.0, &mut f);
    }
}

pub fn sample_cascade(seed: u64, m: usize, k: usize) -> Result<CascadeSample> {
    sample_cascade_capped(seed, m, k, DEFAULT_TUPLE_CAP)
}

pub fn sample_cascade_capped(seed: u64, m: usize, k: usize, cap: usize) -> Result<CascadeSample> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidArgument(format!("need m >= 1 and K >= 1, got m={m}, K={k}")));
    }
    let tuples = (k as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if tuples > cap as u128 {
        return Err(Error::CascadeCap { tuples, cap });
    }
    let mut levels = Vec::with_capacity(m);
    let mut nodes = 1usize;
    for l in 1..=m {
        let mut pts = Vec::with_capacity(nodes * k);
        for parent in 0..nodes {
            node_points(seed, l, parent as u64, k, &mut pts);
        }
        levels.push(pts);
        nodes *= k;
    }
    Ok(CascadeSample { seed, m, k, levels })
}

fn check_gamma(cs: &CascadeSample, gamma_bar: &[f64]) -> Result<()> {
    if gamma_bar.len() != cs.m {
        return Err(Error::LengthMismatch {
            left: gamma_bar.len(),
            right: cs.m,
        });
    }
    let positive = gamma_bar.iter().all(|g| g.is_finite() && *g > 0.0);
    if !positive || gamma_bar.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::NonDecreasingGamma(gamma_bar.to_vec()));
    }
    Ok(())
}

/// `E^{(m)}(e_1, …, e_m) = Σ_l γ̄_l e_l` over all kept tuples, descending.
pub fn cascade_energy(cs: &CascadeSample, gamma_bar: &[f64]) -> Result<PointSample> {
    check_gamma(cs, gamma_bar)?;
    let mut values = Vec::with_capacity(cs.num_tuples());
    cs.for_each_energy(gamma_bar, |_, e| values.push(e));
    values.sort_by(|a, b| b.total_cmp(a));
    PointSample::new(
        values,
        Truncation::PerNodeTop { k: cs.k },
        format!("cascade energies m={} K={} seed {}", cs.m, cs.k, cs.seed),
    )
}

/// Largest value of `E^{(m)}` over the kept tuples.
pub fn cascade_max(cs: &CascadeSample, gamma_bar: &[f64]) -> Result<f64> {
    check_gamma(cs, gamma_bar)?;
    let mut best = f64::NEG_INFINITY;
    cs.for_each_energy(gamma_bar, |_, e| best = best.max(e));
    Ok(best)
}

/// Truncated `∫ exp[β E^{(m)}] dP_m`, kept in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionIntegral {
    pub log_value: f64,
    /// Share of the total carried by tuples under the last kept first-level
    /// point.
    pub tail_fraction: f64,
    pub tail_flag: bool,
}

pub fn cascade_partition_integral(cs: &CascadeSample, gamma_bar: &[f64], beta: f64) -> Result<PartitionIntegral> {
    check_gamma(cs, gamma_bar)?;
    for (l, g) in gamma_bar.iter().enumerate() {
        if !(beta * g > 1.0) {
            return Err(Error::NotFrozen {
                level: l + 1,
                product: beta * g,
            });
        }
    }
    let mut all = Vec::with_capacity(cs.num_tuples());
    cs.for_each_energy(gamma_bar, |_, e| all.push(beta * e));
    let log_value = log_sum_exp(&all);
    let per_first = cs.num_tuples() / cs.k;
    let last = &all[all.len() - per_first..];
    let tail_fraction = (log_sum_exp(last) - log_value).exp();
    Ok(PartitionIntegral {
        log_value,
        tail_fraction,
        tail_flag: tail_fraction > TAIL_THRESHOLD,
    })
}
