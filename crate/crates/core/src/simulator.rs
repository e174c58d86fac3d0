//! Exact enumeration of the finite-N GREM with a uniform field.
//!
//! Configurations are packed into a `u64`: spin `i` (1-based) sits at bit
//! `N − i`, and a set bit means `σ_i = −1`. The level-`k` Gaussian of `σ` is
//! addressed by the prefix `σ >> (N − x_k N)`, so the population count of
//! `σ` is the magnetization class `k` with `m_N = (N − 2k)/N`.
//!
//! Energies are reported on the Hamiltonian scale `√N X_N(h, σ)`, so that
//! `Z_N(β, h) = Σ_σ exp(β √N X_N(h, σ))`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{grem_scaling, GremScaling, OrderParameter};
use crate::optimize::log_sum_exp;
use crate::points::{PointSample, Truncation};
use crate::rng::{level_key, node_gaussian, replica_seed};
use crate::scalar::{rem_scaling, RemScaling};
use crate::stats::paired_z;

pub const DEFAULT_SIZE_CAP: usize = 28;

/// Upper limit on the number of leading spins fixed per parallel work unit.
const UNIT_BITS: usize = 8;

/// Spins left free inside a work unit before splitting pays off.
const MIN_UNIT_SPINS: usize = 10;

/// Largest size accepted even with an overridden cap.
const HARD_LIMIT: usize = 40;

fn default_cap() -> usize {
    DEFAULT_SIZE_CAP
}

/// Everything needed to reproduce a finite-N experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub n: usize,
    pub op: OrderParameter,
    pub h: f64,
    pub betas: Vec<f64>,
    pub seed: u64,
    pub replicas: usize,
    /// Force every Gaussian to zero, leaving only the field.
    #[serde(default)]
    pub zero_disorder: bool,
    #[serde(default = "default_cap")]
    pub size_cap: usize,
}

impl SimulationSpec {
    pub fn new(n: usize, op: OrderParameter, h: f64, betas: Vec<f64>, seed: u64, replicas: usize) -> Self {
        Self {
            n,
            op,
            h,
            betas,
            seed,
            replicas,
            zero_disorder: false,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Spec("N must be >= 1".into()));
        }
        let cap = self.size_cap.min(HARD_LIMIT);
        if self.n > cap {
            return Err(Error::SizeCap { n: self.n, cap });
        }
        if self.replicas == 0 {
            return Err(Error::Spec("replicas must be >= 1".into()));
        }
        if !(self.h.is_finite() && self.h >= 0.0) {
            return Err(Error::Spec(format!("field h = {} must be finite and >= 0", self.h)));
        }
        if let Some(b) = self.betas.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::Spec(format!("beta = {b} must be finite and >= 0")));
        }
        self.level_bounds().map(|_| ())
    }

    /// `[0, x_1 N, …, x_n N]`, requiring every `x_k N` to be an integer.
    pub fn level_bounds(&self) -> Result<Vec<usize>> {
        let nf = self.n as f64;
        let mut bounds = vec![0usize];
        for (k, &x) in self.op.x().iter().enumerate() {
            let raw = x * nf;
            let b = raw.round();
            if (raw - b).abs() > 1e-9 {
                return Err(Error::Spec(format!("x_{} * N = {raw} is not an integer", k + 1)));
            }
            let b = b as usize;
            if b <= *bounds.last().unwrap() {
                return Err(Error::Spec(format!("level {} is empty at N = {}", k + 1, self.n)));
            }
            bounds.push(b);
        }
        Ok(bounds)
    }

    fn replica_seed(&self, replica: usize) -> u64 {
        replica_seed(self.seed, replica as u64)
    }
}

/// Finite-N observables of one disorder replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub replica: usize,
    pub betas: Vec<f64>,
    /// `log Z_N(β, h)` per β.
    pub log_z: Vec<f64>,
    /// `log Z_N / N` per β.
    pub p_n: Vec<f64>,
    /// `N^{−1/2} max_σ X_N(h, σ)`.
    pub m_n: f64,
    /// Magnetization of the maximizing configuration.
    pub argmax_magnetization: f64,
    /// `restricted_log_z[k][b]`: log of the sum over configurations with
    /// `k` down spins at `betas[b]`.
    pub restricted_log_z: Vec<Vec<f64>>,
}

/// Restriction of a partition function to a magnetization window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Window {
    /// No magnetization class falls inside the window.
    Empty,
    LogZ(Vec<f64>),
}

impl ObservableRecord {
    pub fn n(&self) -> usize {
        self.restricted_log_z.len() - 1
    }

    /// Log of the sum over configurations with `|m_N(σ) − q| ≤ eps`.
    pub fn restricted(&self, q: f64, eps: f64) -> Window {
        let n = self.n();
        let inside: Vec<usize> = (0..=n)
            .filter(|&k| {
                let m = (n as f64 - 2.0 * k as f64) / n as f64;
                (m - q).abs() <= eps + 1e-12
            })
            .collect();
        if inside.is_empty() {
            return Window::Empty;
        }
        let values = (0..self.betas.len())
            .map(|b| {
                let terms: Vec<f64> = inside.iter().map(|&k| self.restricted_log_z[k][b]).collect();
                log_sum_exp(&terms)
            })
            .collect();
        Window::LogZ(values)
    }
}

/// Record plus the largest energies `√N X_N(h, σ)`, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub record: ObservableRecord,
    pub top_energies: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Energy(f64);

impl Eq for Energy {}

impl PartialOrd for Energy {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Energy {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Static description of one enumeration pass.
struct Pass<'a> {
    n: usize,
    bounds: Vec<usize>,
    /// `√N a_k` per level.
    coef: Vec<f64>,
    keys: Vec<u64>,
    betas: &'a [f64],
    h: f64,
    /// Classes count the bits of `σ ^ mask`.
    mask: u64,
    zero: bool,
    top_k: usize,
    unit_bits: usize,
}

struct Acc {
    /// Running maximum of the disorder part per class.
    class_max: Vec<f64>,
    /// `Σ exp(β_b (d − class_max))` at `[class * nb + b]`.
    sums: Vec<f64>,
    best: f64,
    best_class: usize,
    heap: BinaryHeap<Reverse<Energy>>,
}

impl Pass<'_> {
    fn new_acc(&self) -> Acc {
        Acc {
            class_max: vec![f64::NEG_INFINITY; self.n + 1],
            sums: vec![0.0; (self.n + 1) * self.betas.len()],
            best: f64::NEG_INFINITY,
            best_class: 0,
            heap: BinaryHeap::with_capacity(self.top_k + 1),
        }
    }

    #[inline(always)]
    fn leaf(&self, acc: &mut Acc, d: f64, class: usize) {
        let e = d + self.h * (self.n as f64 - 2.0 * class as f64);
        if e > acc.best {
            acc.best = e;
            acc.best_class = class;
        }
        if self.top_k > 0 {
            if acc.heap.len() < self.top_k {
                acc.heap.push(Reverse(Energy(e)));
            } else if e > acc.heap.peek().unwrap().0 .0 {
                acc.heap.pop();
                acc.heap.push(Reverse(Energy(e)));
            }
        }
        let nb = self.betas.len();
        if nb == 0 {
            return;
        }
        let m = &mut acc.class_max[class];
        let s = &mut acc.sums[class * nb..(class + 1) * nb];
        if d > *m {
            if *m == f64::NEG_INFINITY {
                s.fill(1.0);
            } else {
                for (sb, &beta) in s.iter_mut().zip(self.betas) {
                    *sb = *sb * (beta * (*m - d)).exp() + 1.0;
                }
            }
            *m = d;
        } else {
            for (sb, &beta) in s.iter_mut().zip(self.betas) {
                *sb += (beta * (d - *m)).exp();
            }
        }
    }

    /// Depth-first walk below `prefix` (which has `bounds[level]` bits).
    fn visit(&self, acc: &mut Acc, unit: u64, level: usize, prefix: u64, d: f64, pop: u32) {
        let lo = self.bounds[level];
        let hi = self.bounds[level + 1];
        let width = hi - lo;
        // bits of this level already fixed by the work unit
        let fixed = self.unit_bits.min(hi).saturating_sub(lo);
        let free = width - fixed;
        let head = if fixed > 0 {
            let shift = self.unit_bits - (lo + fixed);
            ((unit >> shift) & ((1u64 << fixed) - 1)) << free
        } else {
            0
        };
        let mbits = (self.mask >> (self.n - hi)) & low_mask(width);
        let coef = self.coef[level];
        let key = self.keys[level];
        let last = level + 2 == self.bounds.len();
        for r in 0..(1u64 << free) {
            let c = head | r;
            let child = (prefix << width) | c;
            let g = if self.zero { 0.0 } else { node_gaussian(key, child) };
            let dc = d + coef * g;
            let pc = pop + (c ^ mbits).count_ones();
            if last {
                self.leaf(acc, dc, pc as usize);
            } else {
                self.visit(acc, unit, level + 1, child, dc, pc);
            }
        }
    }

    fn merge(&self, into: &mut Acc, other: Acc) {
        let nb = self.betas.len();
        for k in 0..=self.n {
            let m2 = other.class_max[k];
            if m2 == f64::NEG_INFINITY {
                continue;
            }
            let m1 = into.class_max[k];
            let s1 = &mut into.sums[k * nb..(k + 1) * nb];
            let s2 = &other.sums[k * nb..(k + 1) * nb];
            if m1 == f64::NEG_INFINITY {
                s1.copy_from_slice(s2);
                into.class_max[k] = m2;
                continue;
            }
            let m = m1.max(m2);
            for b in 0..nb {
                let beta = self.betas[b];
                s1[b] = s1[b] * (beta * (m1 - m)).exp() + s2[b] * (beta * (m2 - m)).exp();
            }
            into.class_max[k] = m;
        }
        if other.best > into.best {
            into.best = other.best;
            into.best_class = other.best_class;
        }
        for Reverse(e) in other.heap {
            if into.heap.len() < self.top_k {
                into.heap.push(Reverse(e));
            } else if e > into.heap.peek().unwrap().0 {
                into.heap.pop();
                into.heap.push(Reverse(e));
            }
        }
    }

    fn run(&self) -> Acc {
        let units: Vec<Acc> = (0..1u64 << self.unit_bits)
            .into_par_iter()
            .map(|u| {
                let mut acc = self.new_acc();
                self.visit(&mut acc, u, 0, 0, 0.0, 0);
                acc
            })
            .collect();
        let mut iter = units.into_iter();
        let mut total = iter.next().unwrap();
        for acc in iter {
            self.merge(&mut total, acc);
        }
        total
    }
}

fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn build_pass<'a>(
    spec: &SimulationSpec,
    seed: u64,
    betas: &'a [f64],
    h: f64,
    mask: u64,
    top_k: usize,
) -> Result<Pass<'a>> {
    spec.validate()?;
    let bounds = spec.level_bounds()?;
    let sqrt_n = (spec.n as f64).sqrt();
    let coef = spec.op.variance_increments().iter().map(|a2| sqrt_n * a2.sqrt()).collect();
    let keys = (1..=spec.op.n()).map(|k| level_key(seed, k)).collect();
    Ok(Pass {
        n: spec.n,
        bounds,
        coef,
        keys,
        betas,
        h,
        mask,
        zero: spec.zero_disorder,
        top_k,
        unit_bits: spec.n.saturating_sub(MIN_UNIT_SPINS).min(UNIT_BITS),
    })
}

/// Enumerates all `2^N` configurations of replica `replica`.
pub fn enumerate(spec: &SimulationSpec, replica: usize, top_k: usize) -> Result<Enumeration> {
    let pass = build_pass(spec, spec.replica_seed(replica), &spec.betas, spec.h, 0, top_k)?;
    let acc = pass.run();
    let n = spec.n;
    let nf = n as f64;
    let nb = spec.betas.len();
    let restricted: Vec<Vec<f64>> = (0..=n)
        .map(|k| {
            let field = spec.h * (nf - 2.0 * k as f64);
            (0..nb)
                .map(|b| spec.betas[b] * (acc.class_max[k] + field) + acc.sums[k * nb + b].ln())
                .collect()
        })
        .collect();
    let log_z: Vec<f64> = (0..nb)
        .map(|b| log_sum_exp(&restricted.iter().map(|r| r[b]).collect::<Vec<_>>()))
        .collect();
    let mut top: Vec<f64> = acc.heap.into_iter().map(|Reverse(e)| e.0).collect();
    top.sort_by(|a, b| b.total_cmp(a));
    let record = ObservableRecord {
        replica,
        betas: spec.betas.clone(),
        p_n: log_z.iter().map(|l| l / nf).collect(),
        log_z,
        m_n: acc.best / nf,
        argmax_magnetization: (nf - 2.0 * acc.best_class as f64) / nf,
        restricted_log_z: restricted,
    };
    Ok(Enumeration {
        record,
        top_energies: top,
    })
}

pub fn exact_observables(spec: &SimulationSpec, replica: usize) -> Result<ObservableRecord> {
    Ok(enumerate(spec, replica, 0)?.record)
}

/// All replicas of `spec`, in replica order.
pub fn run_replicas(spec: &SimulationSpec, top_k: usize) -> Result<Vec<Enumeration>> {
    spec.validate()?;
    (0..spec.replicas).into_par_iter().map(|r| enumerate(spec, r, top_k)).collect()
}

pub fn restricted_partition(spec: &SimulationSpec, replica: usize, q: f64, eps: f64) -> Result<Window> {
    if !(q.abs() <= 1.0) || !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("need |q| <= 1 and eps > 0, got q={q}, eps={eps}")));
    }
    Ok(exact_observables(spec, replica)?.restricted(q, eps))
}

/// Energies `√N X_N(h, σ)` of every configuration, indexed by the packed
/// configuration. Evaluated level by level without the tree walk.
pub fn configuration_energies(spec: &SimulationSpec, replica: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.n > 20 {
        return Err(Error::SizeCap { n: spec.n, cap: 20 });
    }
    let bounds = spec.level_bounds()?;
    let n = spec.n;
    let sqrt_n = (n as f64).sqrt();
    let seed = spec.replica_seed(replica);
    let a = spec.op.variance_increments();
    Ok((0..1u64 << n)
        .map(|sigma| {
            let mut e = spec.h * (n as f64 - 2.0 * sigma.count_ones() as f64);
            if !spec.zero_disorder {
                for k in 1..bounds.len() {
                    let g = node_gaussian(level_key(seed, k), sigma >> (n - bounds[k]));
                    e += sqrt_n * a[k - 1].sqrt() * g;
                }
            }
            e
        })
        .collect())
}

/// Affine map from `X_N(h, σ)` to the rescaled energies.
#[derive(Debug, Clone, PartialEq)]
pub enum EnergyScaling {
    Rem(RemScaling),
    Grem(GremScaling),
}

impl EnergyScaling {
    /// REM scaling for single-level models, GREM scaling otherwise.
    pub fn for_spec(spec: &SimulationSpec) -> Result<Self> {
        if spec.op.n() == 1 {
            Ok(EnergyScaling::Rem(rem_scaling(spec.n, spec.h)?))
        } else {
            Ok(EnergyScaling::Grem(grem_scaling(&spec.op, spec.h, spec.n)?))
        }
    }

    pub fn inverse(&self, x: f64) -> f64 {
        match self {
            EnergyScaling::Rem(s) => s.inverse(x),
            EnergyScaling::Grem(s) => s.inverse(x),
        }
    }
}

/// Rescales energies `√N X_N` (descending) into a point sample.
pub fn rescale_energies(top_energies: &[f64], n: usize, scaling: &EnergyScaling) -> Result<PointSample> {
    let sqrt_n = (n as f64).sqrt();
    let points: Vec<f64> = top_energies.iter().map(|e| scaling.inverse(e / sqrt_n)).collect();
    let level = points.last().copied().unwrap_or(f64::INFINITY);
    PointSample::new(points, Truncation::Level { level }, format!("top {} rescaled energies, N={n}", top_energies.len()))
}

pub fn rescaled_energy_points(spec: &SimulationSpec, replica: usize, top_k: usize) -> Result<PointSample> {
    if spec.n < 64 && top_k as u128 > 1u128 << spec.n {
        return Err(Error::InvalidArgument(format!("top_k = {top_k} exceeds 2^N")));
    }
    let e = enumerate(spec, replica, top_k)?;
    rescale_energies(&e.top_energies, spec.n, &EnergyScaling::for_spec(spec)?)
}

/// `T_ρ(σ)_i = ρ_i σ_i`.
pub fn gauge_transform(sigma: &[i8], rho: &[i8]) -> Result<Vec<i8>> {
    if sigma.len() != rho.len() {
        return Err(Error::LengthMismatch {
            left: sigma.len(),
            right: rho.len(),
        });
    }
    Ok(sigma.iter().zip(rho).map(|(s, r)| s * r).collect())
}

/// `R_N(σ, τ) = N^{−1} Σ σ_i τ_i`.
pub fn overlap(sigma: &[i8], tau: &[i8]) -> Result<f64> {
    if sigma.len() != tau.len() {
        return Err(Error::LengthMismatch {
            left: sigma.len(),
            right: tau.len(),
        });
    }
    let s: i64 = sigma.iter().zip(tau).map(|(a, b)| (a * b) as i64).sum();
    Ok(s as f64 / sigma.len() as f64)
}

/// Packs `±1` spins into the bit layout used by the enumerator.
pub fn pack(sigma: &[i8]) -> Result<u64> {
    if sigma.len() > 64 {
        return Err(Error::InvalidArgument("at most 64 spins can be packed".into()));
    }
    let mut bits = 0u64;
    for &s in sigma {
        bits = (bits << 1)
            | match s {
                1 => 0,
                -1 => 1,
                other => return Err(Error::InvalidArgument(format!("spin value {other} is not ±1"))),
            };
    }
    Ok(bits)
}

pub fn unpack(bits: u64, n: usize) -> Vec<i8> {
    (1..=n).map(|i| if (bits >> (n - i)) & 1 == 1 { -1 } else { 1 }).collect()
}

/// Paired moment comparison of two restricted partition functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeReport {
    pub replicas: usize,
    pub beta: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub z_mean: f64,
    pub z_var: f64,
    pub passed: bool,
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (mean, v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Compares `log Z^{(p)}` restricted by `|R_N(σ, a) − q| ≤ eps` with the same
/// quantity for reference `b`, over `replicas` disorder draws of the
/// field-free Hamiltonian at `β = spec.betas[0]`. Both restrictions see the
/// same disorder, so the z-scores are paired.
pub fn gauge_invariance_check(
    spec: &SimulationSpec,
    q: f64,
    eps: f64,
    reference_a: &[i8],
    reference_b: &[i8],
    replicas: usize,
) -> Result<GaugeReport> {
    if replicas < 100 {
        return Err(Error::TooFewObservations {
            got: replicas,
            need: 100,
        });
    }
    for r in [reference_a, reference_b] {
        if r.len() != spec.n {
            return Err(Error::LengthMismatch {
                left: r.len(),
                right: spec.n,
            });
        }
    }
    let beta = *spec
        .betas
        .first()
        .ok_or_else(|| Error::Spec("gauge check needs at least one beta".into()))?;
    let (mask_a, mask_b) = (pack(reference_a)?, pack(reference_b)?);
    let betas = [beta];
    let window = |mask: u64, replica: usize| -> Result<f64> {
        let pass = build_pass(spec, spec.replica_seed(replica), &betas, 0.0, mask, 0)?;
        let acc = pass.run();
        let n = spec.n as f64;
        let terms: Vec<f64> = (0..=spec.n)
            .filter(|&k| ((n - 2.0 * k as f64) / n - q).abs() <= eps + 1e-12)
            .map(|k| beta * acc.class_max[k] + acc.sums[k].ln())
            .collect();
        if terms.is_empty() {
            return Err(Error::InvalidArgument(format!("no overlap class within {eps} of {q}")));
        }
        Ok(log_sum_exp(&terms))
    };
    let pairs: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|r| Ok((window(mask_a, r)?, window(mask_b, r)?)))
        .collect::<Result<_>>()?;
    let ya: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let yb: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (mean_a, var_a) = mean_var(&ya);
    let (mean_b, var_b) = mean_var(&yb);
    let d1: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
    let d2: Vec<f64> = pairs
        .iter()
        .map(|(a, b)| (a - mean_a).powi(2) - (b - mean_b).powi(2))
        .collect();
    let z_mean = paired_z(&d1);
    let z_var = paired_z(&d2);
    Ok(GaugeReport {
        replicas,
        beta,
        mean_a,
        mean_b,
        var_a,
        var_b,
        z_mean,
        z_var,
        passed: z_mean.abs() <= 4.0 && z_var.abs() <= 4.0,
    })
}
