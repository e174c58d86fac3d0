//! Limiting free energy and ground state, the REM closed form with its
//! variational cross-check, and Legendre transforms of tabulated free
//! energies.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{coarse_grain, grem_scaling_for, CoarseGraining, OrderParameter};
use crate::optimize::{golden_max, grid_golden_max, linspace, ln_cosh};
use crate::scalar::{energy_density, entropy, ground_state_constant, optimal_magnetization, rem_scaling};

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "inverse temperature beta",
            value: beta,
            domain: "[0, inf)",
        })
    }
}

/// Limiting free energy `p(β, h)` of the GREM with order parameter `op`.
pub fn grem_free_energy(op: &OrderParameter, h: f64, beta: f64) -> Result<f64> {
    grem_free_energy_from(&coarse_grain(op, h)?, beta)
}

/// Same as [`grem_free_energy`] for an already coarse-grained hierarchy.
///
/// Frozen blocks contribute `β[(x̄q̄)^{1/2} ρ(t_l) + h x̄ t_l]`; the remaining
/// fraction `1 − x_J` of the spins is paramagnetic and contributes
/// `(1 − x_J)(log 2 + log cosh βh) + β²(1 − q_J)/2`.
pub fn grem_free_energy_from(cg: &CoarseGraining, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let h = cg.h;
    let frozen = cg.temperature_threshold(beta);
    let (mut x_j, mut q_j, mut p) = (0.0, 0.0, 0.0);
    for l in 0..frozen {
        let t = cg.t_block[l];
        p += beta * ((cg.x_bar[l] * cg.q_bar[l]).sqrt() * energy_density(t) + h * cg.x_bar[l] * t);
        x_j += cg.x_bar[l];
        q_j += cg.q_bar[l];
    }
    let (x_rest, q_rest) = if frozen == cg.m() {
        (0.0, 0.0)
    } else {
        ((1.0 - x_j).max(0.0), (1.0 - q_j).max(0.0))
    };
    Ok(p + x_rest * (LN_2 + ln_cosh(beta * h)) + 0.5 * beta * beta * q_rest)
}

/// Limiting ground state `Σ_l (q̄_l x̄_l)^{1/2} M(θ̄_l^{−1/2} h)`.
pub fn grem_ground_state(op: &OrderParameter, h: f64) -> Result<f64> {
    let cg = coarse_grain(op, h)?;
    cg.block_fields()
        .iter()
        .enumerate()
        .map(|(l, &hl)| Ok((cg.q_bar[l] * cg.x_bar[l]).sqrt() * ground_state_constant(hl)?))
        .sum()
}

/// REM free energy: `log 2 + log cosh βh + β²/2` for `β ≤ β₀ = ρ(t_*(h))`
/// and `β(ρ(t_*) + h t_*)` above.
pub fn rem_free_energy_closed(beta: f64, h: f64) -> Result<f64> {
    check_beta(beta)?;
    let t = optimal_magnetization(h)?;
    let beta0 = energy_density(t);
    Ok(if beta <= beta0 {
        LN_2 + ln_cosh(beta * h) + 0.5 * beta * beta
    } else {
        beta * (beta0 + h * t)
    })
}

/// Freezing temperature `β₀(h) = ρ(t_*(h))`.
pub fn rem_freezing_beta(h: f64) -> Result<f64> {
    Ok(energy_density(optimal_magnetization(h)?))
}

/// Zero-field REM free energy.
fn rem_zero_field(beta: f64) -> f64 {
    let b0 = (2.0 * LN_2).sqrt();
    if beta <= b0 {
        LN_2 + 0.5 * beta * beta
    } else {
        beta * b0
    }
}

/// Free energy of the configurations with magnetization `t` and no field:
/// `g p(β/√g)` with `g = 1 − I(t)/log 2`, and its `g → 0` limit `0`.
pub fn rem_restricted_free_energy(beta: f64, t: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain {
            what: "magnetization",
            value: t,
            domain: "[-1, 1]",
        });
    }
    Ok(restricted(beta, t))
}

fn restricted(beta: f64, t: f64) -> f64 {
    let g = 1.0 - entropy(t) / LN_2;
    if g <= 0.0 {
        return 0.0;
    }
    g * rem_zero_field(beta / g.sqrt())
}

/// `max_t {tβh + g(t) p(β/√g(t))}` by a grid scan over `[−1, 1]` followed by
/// golden-section refinement.
pub fn rem_free_energy_variational(beta: f64, h: f64, grid_size: usize) -> Result<f64> {
    check_beta(beta)?;
    if grid_size < 3 {
        return Err(Error::InvalidArgument(format!("grid_size must be >= 3, got {grid_size}")));
    }
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::Domain {
            what: "field strength h",
            value: h,
            domain: "[0, inf)",
        });
    }
    let grid = linspace(-1.0, 1.0, grid_size);
    let (_, value, _) = grid_golden_max(|t| t * beta * h + restricted(beta, t), &grid, 1e-13);
    Ok(value)
}

/// Function sampled on an increasing grid. Evaluation between nodes uses
/// local cubic Lagrange interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if grid.is_empty() {
            return Err(Error::Empty("tabulated function"));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Interpolated value at `x`, clamped to the grid range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if n == 1 {
            return self.values[0];
        }
        let x = x.clamp(self.grid[0], self.grid[n - 1]);
        let i = self.grid.partition_point(|&g| g <= x).clamp(1, n - 1) - 1;
        let npts = n.min(4);
        let lo = i.saturating_sub(1).min(n - npts);
        let nodes = lo..lo + npts;
        let mut acc = 0.0;
        for a in nodes.clone() {
            let mut w = 1.0;
            for b in nodes.clone() {
                if a != b {
                    w *= (x - self.grid[b]) / (self.grid[a] - self.grid[b]);
                }
            }
            acc += w * self.values[a];
        }
        acc
    }
}

/// Result of a one-dimensional transform together with its optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub value: f64,
    pub argopt: f64,
    /// The optimizer sits on the edge of the tabulated range, so the true
    /// optimum may lie outside it.
    pub boundary: bool,
}

fn refine_max(f: impl Fn(f64) -> f64, grid: &[f64]) -> Transform {
    let (x, v, i) = grid_golden_max(&f, grid, 1e-12);
    let boundary = grid.len() > 1 && (i == 0 || i == grid.len() - 1) && {
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        let tol = 1e-9 * (hi - lo);
        (x - lo).abs() <= tol || (x - hi).abs() <= tol
    };
    Transform {
        value: v,
        argopt: x,
        boundary,
    }
}

/// `inf_λ (−λq + p(λ))` for a tabulated `p`.
pub fn legendre_restrict(p_of_lambda: &TabulatedFunction, q: f64) -> Transform {
    let t = refine_max(|l| q * l - p_of_lambda.eval(l), p_of_lambda.grid());
    Transform {
        value: -t.value,
        ..t
    }
}

/// `sup_q (f(q) + q)` for a restricted free energy `f` tabulated over the
/// constraint range.
pub fn global_from_restricted(restricted: &TabulatedFunction) -> Transform {
    refine_max(|q| restricted.eval(q) + q, restricted.grid())
}

/// Free energy on a grid of inverse temperatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyCurve {
    pub h: f64,
    pub beta_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub threshold_levels: Vec<usize>,
}

pub fn free_energy_curve(op: &OrderParameter, h: f64, betas: &[f64]) -> Result<FreeEnergyCurve> {
    if betas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("beta grid must be strictly increasing".into()));
    }
    let cg = coarse_grain(op, h)?;
    let values = betas
        .iter()
        .map(|&b| grem_free_energy_from(&cg, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(FreeEnergyCurve {
        h,
        beta_grid: betas.to_vec(),
        values,
        threshold_levels: betas.iter().map(|&b| cg.temperature_threshold(b)).collect(),
    })
}

/// Logarithm of the factor that makes `Z_N(β, h)` converge to the cascade
/// partition integral: frozen blocks `l ≤ l(β, h)` are centred by
/// `β√N Σ q̄_l^{1/2} B_{x̄_l N}(θ̄_l^{−1/2} h)` and the remaining spins by
/// their annealed value `N[(1 − x_J)(log 2 + log cosh βh) + β²(1 − q_J)/2]`.
pub fn partition_log_normalizer(cg: &CoarseGraining, beta: f64, n: usize) -> Result<f64> {
    check_beta(beta)?;
    let scaling = grem_scaling_for(cg, n)?;
    let frozen = cg.temperature_threshold(beta);
    let (mut x_j, mut q_j, mut centre) = (0.0, 0.0, 0.0);
    for l in 0..frozen {
        let b = rem_scaling(scaling.block_sizes[l], cg.block_fields()[l])?.b;
        centre += cg.q_bar[l].sqrt() * b;
        x_j += cg.x_bar[l];
        q_j += cg.q_bar[l];
    }
    let (x_rest, q_rest) = if frozen == cg.m() {
        (0.0, 0.0)
    } else {
        ((1.0 - x_j).max(0.0), (1.0 - q_j).max(0.0))
    };
    let nf = n as f64;
    Ok(-(beta * nf.sqrt() * centre + nf * (x_rest * (LN_2 + ln_cosh(beta * cg.h)) + 0.5 * beta * beta * q_rest)))
}

/// Maximizer of the REM variational problem, exposed for diagnostics.
pub fn rem_variational_magnetization(beta: f64, h: f64) -> f64 {
    golden_max(|t| t * beta * h + restricted(beta, t), -1.0, 1.0, 1e-12).0
}
