//! Order parameters, slopes and the field-dependent coarse-graining of the
//! GREM hierarchy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, energy_density, rem_scaling, DEFAULT_TOL};

/// Relative tolerance under which two modified slopes count as equal.
pub const TIE_RTOL: f64 = 1e-10;

/// Step function `ϱ(x) = Σ q_k 1[x_k, x_{k+1})` with `n` jumps.
///
/// `x_0 = q_0 = 0` are implied; `x_n = q_n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOrderParameter", into = "RawOrderParameter")]
pub struct OrderParameter {
    x: Vec<f64>,
    q: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrderParameter {
    x: Vec<f64>,
    q: Vec<f64>,
}

impl TryFrom<RawOrderParameter> for OrderParameter {
    type Error = Error;

    fn try_from(raw: RawOrderParameter) -> Result<Self> {
        OrderParameter::new(raw.x, raw.q)
    }
}

impl From<OrderParameter> for RawOrderParameter {
    fn from(op: OrderParameter) -> Self {
        RawOrderParameter { x: op.x, q: op.q }
    }
}

fn check_increasing(name: &str, v: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for (i, &value) in v.iter().enumerate() {
        if !value.is_finite() || value <= prev {
            return Err(Error::OrderParameter(format!(
                "{name} must be strictly increasing in (0, 1]; {name}[{i}] = {value} after {prev}"
            )));
        }
        prev = value;
    }
    if prev != 1.0 {
        return Err(Error::OrderParameter(format!("last {name} must equal 1, got {prev}")));
    }
    Ok(())
}

impl OrderParameter {
    pub fn new(x: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if x.is_empty() || q.is_empty() {
            return Err(Error::OrderParameter("x and q must be non-empty".into()));
        }
        if x.len() != q.len() {
            return Err(Error::OrderParameter(format!(
                "x has {} entries but q has {}",
                x.len(),
                q.len()
            )));
        }
        check_increasing("x", &x)?;
        check_increasing("q", &q)?;
        Ok(Self { x, q })
    }

    /// The single-level model.
    pub fn rem() -> Self {
        Self {
            x: vec![1.0],
            q: vec![1.0],
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// `x_k` with `x_0 = 0`.
    pub fn x_at(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.x[k - 1]
        }
    }

    /// `q_k` with `q_0 = 0`.
    pub fn q_at(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.q[k - 1]
        }
    }

    /// Variance increments `a_k² = q_k − q_{k−1}`.
    pub fn variance_increments(&self) -> Vec<f64> {
        (1..=self.n()).map(|k| self.q_at(k) - self.q_at(k - 1)).collect()
    }

    /// `ϱ(s)` for an overlap `s ∈ [0, 1]`.
    pub fn rho_at(&self, s: f64) -> f64 {
        self.x
            .iter()
            .zip(&self.q)
            .take_while(|(x, _)| **x <= s)
            .last()
            .map_or(0.0, |(_, q)| *q)
    }

    fn check_indices(&self, j: usize, k: usize) -> Result<()> {
        if j == 0 || j > k || k > self.n() {
            Err(Error::IndexOutOfRange { j, k, n: self.n() })
        } else {
            Ok(())
        }
    }

    /// `θ_{j,k} = (q_k − q_{j−1})/(x_k − x_{j−1})` for `1 ≤ j ≤ k ≤ n`.
    pub fn slope(&self, j: usize, k: usize) -> Result<f64> {
        self.check_indices(j, k)?;
        Ok(self.slope_unchecked(j, k))
    }

    fn slope_unchecked(&self, j: usize, k: usize) -> f64 {
        (self.q_at(k) - self.q_at(j - 1)) / (self.x_at(k) - self.x_at(j - 1))
    }

    /// `θ̃_{j,k}(h) = θ_{j,k} / ρ(t_*(θ_{j,k}^{−1/2} h))²`.
    pub fn modified_slope(&self, j: usize, k: usize, h: f64) -> Result<f64> {
        self.check_indices(j, k)?;
        modified(self.slope_unchecked(j, k), h)
    }

    pub fn coarse_grain(&self, h: f64) -> Result<CoarseGraining> {
        coarse_grain(self, h)
    }
}

fn block_field(theta: f64, h: f64) -> f64 {
    h / theta.sqrt()
}

fn modified(theta: f64, h: f64) -> Result<f64> {
    let t = scalar::t_star(block_field(theta, h), DEFAULT_TOL)?;
    let r = energy_density(t);
    Ok(theta / (r * r))
}

/// Outcome of comparing two modified slopes with [`TIE_RTOL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Greater,
    Tie,
    Less,
}

fn compare(a: f64, b: f64) -> Cmp {
    if (a - b).abs() <= TIE_RTOL * a.abs().max(b.abs()) {
        Cmp::Tie
    } else if a > b {
        Cmp::Greater
    } else {
        Cmp::Less
    }
}

/// The merged hierarchy produced by the coarse-graining algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseGraining {
    pub h: f64,
    /// `0 = J_0 < J_1 < … < J_m = n`.
    pub j: Vec<usize>,
    pub q_bar: Vec<f64>,
    pub x_bar: Vec<f64>,
    pub theta_bar: Vec<f64>,
    pub gamma_bar: Vec<f64>,
    /// Block magnetizations `t_*(θ̄_l^{−1/2} h)`.
    pub t_block: Vec<f64>,
    /// Some candidate index failed only because of an equality between
    /// modified slopes.
    pub critical: bool,
}

impl CoarseGraining {
    pub fn m(&self) -> usize {
        self.gamma_bar.len()
    }

    /// Block fields `θ̄_l^{−1/2} h`.
    pub fn block_fields(&self) -> Vec<f64> {
        self.theta_bar.iter().map(|&t| block_field(t, self.h)).collect()
    }

    /// Order parameter whose levels are the blocks.
    pub fn to_order_parameter(&self) -> Result<OrderParameter> {
        let mut x = Vec::with_capacity(self.m());
        let mut q = Vec::with_capacity(self.m());
        for l in 1..=self.m() {
            let last = l == self.m();
            x.push(if last { 1.0 } else { self.x_bar[..l].iter().sum() });
            q.push(if last { 1.0 } else { self.q_bar[..l].iter().sum() });
        }
        OrderParameter::new(x, q)
    }

    /// `l(β, h) = #{l : β γ̄_l > 1}`.
    pub fn temperature_threshold(&self, beta: f64) -> usize {
        self.gamma_bar.iter().take_while(|&&g| beta * g > 1.0).count()
    }
}

/// Runs the index-selection algorithm
/// `J_l = min{J > J_{l−1} : θ̃_{J_{l−1}+1, J} > θ̃_{J+1, k} for all k > J}`.
pub fn coarse_grain(op: &OrderParameter, h: f64) -> Result<CoarseGraining> {
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::Domain {
            what: "field strength h",
            value: h,
            domain: "[0, inf)",
        });
    }
    let n = op.n();
    // table[j][k] = θ̃_{j,k}, 1-based
    let mut table = vec![vec![f64::NAN; n + 1]; n + 2];
    for j in 1..=n {
        for k in j..=n {
            table[j][k] = modified(op.slope_unchecked(j, k), h)?;
        }
    }

    let mut j_idx = vec![0usize];
    let mut critical = false;
    let mut start = 0usize;
    while start < n {
        let mut chosen = n;
        for cand in start + 1..=n {
            let left = table[start + 1][cand];
            let mut strict = true;
            let mut tie = false;
            for k in cand + 1..=n {
                match compare(left, table[cand + 1][k]) {
                    Cmp::Greater => {}
                    Cmp::Tie => {
                        strict = false;
                        tie = true;
                    }
                    Cmp::Less => {
                        strict = false;
                        tie = false;
                        break;
                    }
                }
            }
            if strict {
                chosen = cand;
                break;
            }
            if tie {
                critical = true;
            }
        }
        j_idx.push(chosen);
        start = chosen;
    }

    let m = j_idx.len() - 1;
    let mut cg = CoarseGraining {
        h,
        j: j_idx.clone(),
        q_bar: Vec::with_capacity(m),
        x_bar: Vec::with_capacity(m),
        theta_bar: Vec::with_capacity(m),
        gamma_bar: Vec::with_capacity(m),
        t_block: Vec::with_capacity(m),
        critical,
    };
    for w in j_idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        let q_bar = op.q_at(b) - op.q_at(a);
        let x_bar = op.x_at(b) - op.x_at(a);
        let theta = op.slope_unchecked(a + 1, b);
        cg.q_bar.push(q_bar);
        cg.x_bar.push(x_bar);
        cg.theta_bar.push(theta);
        cg.gamma_bar.push(table[a + 1][b].sqrt());
        cg.t_block.push(scalar::t_star(block_field(theta, h), DEFAULT_TOL)?);
    }
    Ok(cg)
}

/// Centering of the GREM energies,
/// `u_{N,ϱ,h}(x) = Σ_l q̄_l^{1/2} B_{x̄_l N}(θ̄_l^{−1/2} h) + N^{−1/2} x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GremScaling {
    pub n: usize,
    pub shift: f64,
    pub slope: f64,
    /// Effective block sizes, `round(X_l N) − round(X_{l−1} N)` with `X_l`
    /// the cumulative block widths.
    pub block_sizes: Vec<usize>,
    /// Whether every `x̄_l N` was already an integer.
    pub exact: bool,
}

impl GremScaling {
    pub fn forward(&self, x: f64) -> f64 {
        self.shift + self.slope * x
    }

    pub fn inverse(&self, y: f64) -> f64 {
        (y - self.shift) / self.slope
    }
}

pub fn grem_scaling(op: &OrderParameter, h: f64, n: usize) -> Result<GremScaling> {
    grem_scaling_for(&coarse_grain(op, h)?, n)
}

pub fn grem_scaling_for(cg: &CoarseGraining, n: usize) -> Result<GremScaling> {
    if n == 0 {
        return Err(Error::InvalidArgument("system size must be >= 1".into()));
    }
    let nf = n as f64;
    let mut shift = 0.0;
    let mut sizes = Vec::with_capacity(cg.m());
    let mut exact = true;
    let mut cum = 0.0;
    let mut prev = 0usize;
    for l in 0..cg.m() {
        cum += cg.x_bar[l];
        let raw = if l + 1 == cg.m() { nf } else { cum * nf };
        let end = raw.round() as usize;
        if (raw - raw.round()).abs() > 1e-9 {
            exact = false;
        }
        let size = end.saturating_sub(prev).max(1);
        prev = end;
        sizes.push(size);
        let block = rem_scaling(size, block_field(cg.theta_bar[l], cg.h))?;
        shift += cg.q_bar[l].sqrt() * block.b;
    }
    Ok(GremScaling {
        n,
        shift,
        slope: 1.0 / nf.sqrt(),
        block_sizes: sizes,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn op(x: &[f64], q: &[f64]) -> OrderParameter {
        OrderParameter::new(x.to_vec(), q.to_vec()).unwrap()
    }

    #[test]
    fn validation() {
        assert_eq!(OrderParameter::new(vec![1.0], vec![1.0]).unwrap().n(), 1);
        assert_eq!(op(&[0.5, 1.0], &[0.25, 1.0]).n(), 2);
        assert!(OrderParameter::new(vec![0.5, 1.0], vec![1.0, 0.5]).is_err());
        assert!(OrderParameter::new(vec![0.5, 0.9], vec![0.5, 1.0]).is_err());
        assert!(OrderParameter::new(vec![], vec![]).is_err());
        assert!(OrderParameter::new(vec![0.5, 1.0], vec![1.0]).is_err());
        assert!(OrderParameter::new(vec![0.0, 1.0], vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn slopes() {
        let o = op(&[0.5, 1.0], &[0.75, 1.0]);
        assert!((o.slope(1, 1).unwrap() - 1.5).abs() < 1e-15);
        assert!((o.slope(2, 2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(o.slope(1, 2).unwrap(), 1.0);
        assert_eq!(OrderParameter::rem().slope(1, 1).unwrap(), 1.0);
        assert!(matches!(o.slope(2, 1), Err(Error::IndexOutOfRange { .. })));
        assert!(o.slope(0, 1).is_err());
        assert!(o.slope(1, 3).is_err());
    }

    #[test]
    fn modified_slopes_at_zero_field() {
        let o = op(&[0.5, 1.0], &[0.75, 1.0]);
        let v = o.modified_slope(1, 1, 0.0).unwrap();
        assert!((v - 1.5 / (2.0 * LN_2)).abs() < 1e-14);
        let w = o.modified_slope(2, 2, 0.5).unwrap();
        let t = scalar::t_star(0.5 / 0.5f64.sqrt(), 1e-13).unwrap();
        assert!((w - 0.5 / energy_density(t).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn coarse_grain_examples() {
        let rem = OrderParameter::rem().coarse_grain(0.5).unwrap();
        assert_eq!(rem.j, vec![0, 1]);
        let r = energy_density(scalar::t_star(0.5, 1e-13).unwrap());
        assert!((rem.gamma_bar[0] - 1.0 / r).abs() < 1e-12);

        let concave = op(&[0.5, 1.0], &[0.75, 1.0]).coarse_grain(0.0).unwrap();
        assert_eq!(concave.j, vec![0, 1, 2]);
        assert!(!concave.critical);
        assert!(concave.gamma_bar[0] > concave.gamma_bar[1]);

        let convex = op(&[0.5, 1.0], &[0.25, 1.0]).coarse_grain(0.0).unwrap();
        assert_eq!(convex.j, vec![0, 2]);
        assert_eq!(convex.q_bar, vec![1.0]);
    }

    #[test]
    fn collinear_levels_merge_and_flag() {
        let line = op(&[0.25, 0.5, 1.0], &[0.25, 0.5, 1.0]).coarse_grain(0.0).unwrap();
        assert_eq!(line.j, vec![0, 3]);
        assert!(line.critical);
    }

    #[test]
    fn threshold_counts_frozen_blocks() {
        let cg = OrderParameter::rem().coarse_grain(0.0).unwrap();
        let b0 = (2.0 * LN_2).sqrt();
        assert_eq!(cg.temperature_threshold(1e-9), 0);
        assert_eq!(cg.temperature_threshold(b0 * (1.0 - 1e-9)), 0);
        assert_eq!(cg.temperature_threshold(b0 * (1.0 + 1e-9)), 1);
    }

    #[test]
    fn grem_scaling_reduces_to_rem() {
        let s = grem_scaling(&OrderParameter::rem(), 0.5, 100).unwrap();
        assert!((s.shift - rem_scaling(100, 0.5).unwrap().b).abs() < 1e-12);
        assert!(s.exact);
        assert!((s.inverse(s.forward(1.234)) - 1.234).abs() < 1e-12);

        let o = op(&[0.3, 1.0], &[0.5, 1.0]);
        let s = grem_scaling(&o, 0.0, 10).unwrap();
        assert_eq!(s.block_sizes, vec![3, 7]);
        let s = grem_scaling(&o, 0.0, 11).unwrap();
        assert!(!s.exact);
        assert_eq!(s.block_sizes.iter().sum::<usize>(), 11);
    }

    #[test]
    fn rho_step_function() {
        let o = op(&[0.5, 1.0], &[0.75, 1.0]);
        assert_eq!(o.rho_at(0.0), 0.0);
        assert_eq!(o.rho_at(0.49), 0.0);
        assert_eq!(o.rho_at(0.5), 0.75);
        assert_eq!(o.rho_at(1.0), 1.0);
    }
}
