//! Independent checks: brute-force segment costs, exhaustive search over
//! gradual path families, and seeded property checks of the path
//! comparison inequalities.

pub mod gradual;
pub mod lemmas;
pub mod segment;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{FaceSet, GeometryError};

pub use gradual::{enumerate_gradual, GradualOracle};
pub use lemmas::{condition1_survey, lemma_suite};
pub use segment::{segment_cost_oracle, SegmentOptimum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{which} point {point:?} is not on {faces} inside the octant")]
    NotOnFaces { which: &'static str, point: [f64; 3], faces: FaceSet },
    #[error("face set {0} is too large")]
    BadFaceSet(FaceSet),
    #[error("drift is zero")]
    ZeroDrift,
    #[error("samples must be positive")]
    NoSamples,
    #[error("grid resolution must be at least 8")]
    BadGrid,
    #[error("invalid problem data: {0}")]
    Data(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    pub samples: usize,
    pub seed: u64,
    /// Grid points per side for the gradual search.
    pub grid_resolution: usize,
    /// Relative tolerance for identities checked in floating point.
    pub tolerance: f64,
    /// Sample outside the hypotheses of the differentR check to show it
    /// catches violations.
    pub adversarial: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { samples: 10_000, seed: 42, grid_resolution: 24, tolerance: 1e-9, adversarial: false }
    }
}

/// One failing sample: its index and the values needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationRecord {
    pub sample: usize,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    /// Samples deliberately violate a hypothesis, so violations are the
    /// expected outcome.
    pub expect_violations: bool,
    /// At most [`MAX_RECORDS`] examples.
    pub records: Vec<ViolationRecord>,
}

pub const MAX_RECORDS: usize = 20;

/// How often Condition 1 holds over stable data with `r1, r2 ≥ 0`, with
/// each pair taken in `(max, min)` order. Measured, not asserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition1Survey {
    pub grid: usize,
    /// Stable cells with `r1 ≠ r2`.
    pub cells: usize,
    pub holds: usize,
    pub min_margin: f64,
    pub min_margin_at: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub samples: usize,
    pub adversarial: bool,
    pub checks: Vec<CheckReport>,
    pub condition1_survey: Condition1Survey,
}

impl OracleReport {
    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    /// Violations in checks that sample inside their hypotheses.
    pub fn unexpected_violations(&self) -> usize {
        self.checks.iter().filter(|c| !c.expect_violations).map(|c| c.violations).sum()
    }
}
