//! Numerical laboratory for the generalized random energy model (GREM) with a
//! uniform external field.
//!
//! The crate is organised bottom-up:
//!
//! - [`scalar`]: Cramér entropy, the energy density `ρ(t)`, the optimal
//!   magnetization `t_*(h)`, the ground-state constant `M(h)` and the REM
//!   centering sequences.
//! - [`model`]: order parameters, slopes, the field-dependent coarse-graining
//!   of the hierarchy and the GREM scaling function.
//! - [`limit`]: closed-form limiting free energy and ground state, the REM
//!   variational formula and Legendre-transform helpers for restricted free
//!   energies.
//! - [`simulator`]: exact enumeration of all `2^N` configurations for a given
//!   disorder realisation.
//! - [`cascade`]: samplers for the Poisson point process with intensity
//!   `e^{-x} dx` and its nested cascades.
//! - [`stats`]: goodness-of-fit tests used to compare finite systems with
//!   their limits.

pub mod cascade;
pub mod error;
pub mod limit;
pub mod model;
mod optimize;
pub mod points;
pub mod rng;
pub mod scalar;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use limit::{FreeEnergyCurve, TabulatedFunction};
pub use model::{CoarseGraining, GremScaling, OrderParameter};
pub use points::{PointSample, Truncation};
pub use scalar::{EntropyPoint, RemScaling, ShiftConvention};
pub use simulator::{ObservableRecord, SimulationSpec};
pub use stats::GofReport;
