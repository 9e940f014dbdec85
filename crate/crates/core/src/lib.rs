//! Large deviations variational problem for rotationally symmetric
//! reflected Brownian motion in the three-dimensional octant: stability,
//! closed-form path costs, optimal path classification and brute-force
//! verification.

pub mod costs;
pub mod geometry;
pub mod minimize;
pub mod oracle;
pub mod paths;
pub mod solver;
pub mod stability;

pub use costs::{CostError, CostModel, Provenance};
pub use geometry::{FaceSet, GeometryError, Mat3, ProblemData, RsParams, Vec3};
pub use paths::{validate_triple, PathError, RegulationTriple, Segment};
pub use solver::{best_cost_to_point, classify_optimal_path, Classification, SolverError, Verdict};
pub use stability::{classify_stability, StabilityReport};
