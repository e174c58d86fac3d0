//! Finite point samples with truncation metadata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a point sample was cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Truncation {
    /// Every point of the underlying process at or above `level` is present.
    Level { level: f64 },
    /// Each node of a cascade kept its own top `k` points; the sample is not
    /// complete above any single level.
    PerNodeTop { k: usize },
}

impl Truncation {
    /// The level above which the sample is complete, if there is one.
    pub fn resolved_level(&self) -> Option<f64> {
        match *self {
            Truncation::Level { level } => Some(level),
            Truncation::PerNodeTop { .. } => None,
        }
    }
}

/// Finite multiset of reals stored in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    points: Vec<f64>,
    pub truncation: Truncation,
    pub meta: String,
}

impl PointSample {
    /// Builds a sample from points already in non-increasing order.
    pub fn new(points: Vec<f64>, truncation: Truncation, meta: impl Into<String>) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite point {bad}")));
        }
        if points.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("points must be in descending order".into()));
        }
        Ok(Self {
            points,
            truncation,
            meta: meta.into(),
        })
    }

    /// Sorts `points` descending and records the smallest one as the
    /// truncation level.
    pub fn from_unsorted(mut points: Vec<f64>, meta: impl Into<String>) -> Result<Self> {
        points.sort_by(|a, b| b.total_cmp(a));
        let level = points.last().copied().unwrap_or(f64::INFINITY);
        Self::new(points, Truncation::Level { level }, meta)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn top(&self) -> Option<f64> {
        self.points.first().copied()
    }

    /// Number of points in `[a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        self.points.iter().filter(|&&p| p >= a && p <= b).count()
    }

    pub fn into_points(self) -> Vec<f64> {
        self.points
    }
}
