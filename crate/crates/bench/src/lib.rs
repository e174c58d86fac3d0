//! Fixtures shared by the benchmarks.

use gremlab::{OrderParameter, SimulationSpec};

/// Two-level GREM used across the benchmarks.
pub fn two_level() -> OrderParameter {
    OrderParameter::new(vec![0.5, 1.0], vec![0.75, 1.0]).expect("valid order parameter")
}

pub fn spec(n: usize, betas: Vec<f64>) -> SimulationSpec {
    SimulationSpec::new(n, two_level(), 0.5, betas, 1, 1)
}
