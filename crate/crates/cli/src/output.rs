//! File writers. Floats are printed in their shortest round-trip form, so
//! identical values always produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

pub const TSTAR_HEADER: &str = "h,t_star,M,rho_t_star";
pub const COARSE_GRAIN_HEADER: &str = "block,J,q_bar,x_bar,theta_bar,gamma_bar,t_block,critical";
pub const FREE_ENERGY_HEADER: &str = "beta,p,threshold,p_variational";
pub const POINTS_HEADER: &str = "rank,value";
pub const INTEGRALS_HEADER: &str = "sample,log_integral,tail_fraction,tail_flag";

/// CSV table built row by row.
#[derive(Debug, Clone)]
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &str) -> Self {
        Self {
            text: format!("{header}\n"),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub fn points_csv(points: &[f64]) -> String {
    let mut s = format!("{POINTS_HEADER}\n");
    for (i, v) in points.iter().enumerate() {
        writeln!(s, "{},{v}", i + 1).unwrap();
    }
    s
}

pub fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write(path, &s)
}

/// One JSON document per line.
pub fn jsonl<T: Serialize>(items: &[T]) -> anyhow::Result<String> {
    let mut s = String::new();
    for item in items {
        s.push_str(&serde_json::to_string(item)?);
        s.push('\n');
    }
    Ok(s)
}
