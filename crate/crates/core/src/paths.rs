//! Piecewise-linear Skorohod triples `(x, y, z)` with `z = x + Ry`:
//! construction, validation, cost, and the scale/rotate/merge
//! transformations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{rotate, Mat3, ProblemData, Vec3};

/// Absolute tolerance for positions and rates.
pub const PATH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("segment duration must be positive and finite, got {0}")]
    BadDuration(f64),
    #[error("non-finite value in segment")]
    NonFinite,
    #[error("path ends at {end:?} but next path starts at {start:?}")]
    Discontinuous { end: [f64; 3], start: [f64; 3] },
    #[error("invalid path: {0}")]
    Invalid(Violation),
    #[error("scale factor must be positive, got {0}")]
    BadScale(f64),
    #[error("malformed path JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub xdot: Vec3,
    pub ydot: Vec3,
    pub zdot: Vec3,
    pub z_start: Vec3,
}

impl Segment {
    /// Segment with free rates `xdot`, pushing rates `ydot`; `zdot` follows.
    pub fn new(z_start: Vec3, duration: f64, xdot: Vec3, ydot: Vec3, r: &Mat3) -> Result<Self, PathError> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(PathError::BadDuration(duration));
        }
        let zdot = xdot + r * ydot;
        let s = Segment { duration, xdot, ydot, zdot, z_start };
        if [z_start, xdot, ydot, zdot].iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(PathError::NonFinite);
        }
        Ok(s)
    }

    /// Segment from `z_start` to `z_end` in time `duration` with pushing
    /// rates `ydot`; `xdot` follows.
    pub fn between(z_start: Vec3, z_end: Vec3, duration: f64, ydot: Vec3, r: &Mat3) -> Result<Self, PathError> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(PathError::BadDuration(duration));
        }
        let zdot = (z_end - z_start) / duration;
        Self::new(z_start, duration, zdot - r * ydot, ydot, r)
    }

    pub fn z_end(&self) -> Vec3 {
        self.z_start + self.zdot * self.duration
    }

    /// `½‖ẋ − θ‖²_Γ T`.
    pub fn cost(&self, data: &ProblemData) -> f64 {
        let e = self.xdot - data.theta();
        0.5 * data.inner(&e, &e) * self.duration
    }
}

/// A regulation triple started at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulationTriple {
    pub origin: Vec3,
    pub segments: Vec<Segment>,
}

impl RegulationTriple {
    pub fn empty(origin: Vec3) -> Self {
        Self { origin, segments: Vec::new() }
    }

    pub fn single(segment: Segment) -> Self {
        Self { origin: segment.z_start, segments: vec![segment] }
    }

    pub fn endpoint(&self) -> Vec3 {
        self.segments.last().map_or(self.origin, Segment::z_end)
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn to_json(&self) -> PathJson {
        PathJson {
            origin: self.origin.into(),
            segments: self
                .segments
                .iter()
                .map(|s| SegmentJson { duration: s.duration, xdot: s.xdot.into(), ydot: s.ydot.into() })
                .collect(),
        }
    }

    /// Rebuilds positions and `zdot` from the serialized form.
    pub fn from_json(json: &PathJson, r: &Mat3) -> Result<Self, PathError> {
        let mut z = Vec3::from(json.origin);
        let mut segments = Vec::with_capacity(json.segments.len());
        for s in &json.segments {
            let seg = Segment::new(z, s.duration, s.xdot.into(), s.ydot.into(), r)?;
            z = seg.z_end();
            segments.push(seg);
        }
        Ok(Self { origin: json.origin.into(), segments })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentJson {
    #[serde(rename = "T")]
    pub duration: f64,
    pub xdot: [f64; 3],
    pub ydot: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathJson {
    pub origin: [f64; 3],
    pub segments: Vec<SegmentJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// `ż ≠ ẋ + Rẏ`
    RateMismatch,
    /// A segment endpoint leaves the octant.
    LeavesOctant,
    /// `ẏ` has a negative component.
    NegativePushing,
    /// Pushing on a face the path is not on, or moving off it.
    Complementarity,
    /// Segment does not start where the previous one ended.
    Discontinuity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub segment: usize,
    pub kind: ViolationKind,
    pub coordinate: Option<usize>,
    pub magnitude: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} at segment {}", self.kind, self.segment)?;
        if let Some(c) = self.coordinate {
            write!(f, ", coordinate {}", c + 1)?;
        }
        write!(f, " (magnitude {:e})", self.magnitude)
    }
}

/// Returns the first violated condition, scanning segments in order.
pub fn validate_triple(p: &RegulationTriple, data: &ProblemData) -> Result<(), Violation> {
    let r = data.r();
    let mut prev_end = p.origin;
    for (n, s) in p.segments.iter().enumerate() {
        let v = |kind, coordinate, magnitude| Violation { segment: n, kind, coordinate, magnitude };
        let gap = (s.z_start - prev_end).amax();
        if gap > PATH_TOL {
            return Err(v(ViolationKind::Discontinuity, None, gap));
        }
        let mismatch = s.zdot - (s.xdot + r * s.ydot);
        if mismatch.amax() > PATH_TOL {
            return Err(v(ViolationKind::RateMismatch, None, mismatch.amax()));
        }
        let end = s.z_end();
        for i in 0..3 {
            let low = s.z_start[i].min(end[i]);
            if low < -PATH_TOL {
                return Err(v(ViolationKind::LeavesOctant, Some(i), -low));
            }
        }
        for i in 0..3 {
            if s.ydot[i] < -PATH_TOL {
                return Err(v(ViolationKind::NegativePushing, Some(i), -s.ydot[i]));
            }
        }
        for i in 0..3 {
            if s.ydot[i] > PATH_TOL {
                if s.z_start[i].abs() > PATH_TOL {
                    return Err(v(ViolationKind::Complementarity, Some(i), s.z_start[i].abs()));
                }
                if s.zdot[i].abs() > PATH_TOL {
                    return Err(v(ViolationKind::Complementarity, Some(i), s.zdot[i].abs()));
                }
            }
        }
        prev_end = end;
    }
    Ok(())
}

pub fn path_cost(p: &RegulationTriple, data: &ProblemData) -> Result<f64, PathError> {
    validate_triple(p, data).map_err(PathError::Invalid)?;
    Ok(p.segments.iter().map(|s| s.cost(data)).sum())
}

/// Multiplies positions and durations by `k`; rates are unchanged.
pub fn scale_path(p: &RegulationTriple, k: f64) -> Result<RegulationTriple, PathError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(PathError::BadScale(k));
    }
    Ok(RegulationTriple {
        origin: p.origin * k,
        segments: p
            .segments
            .iter()
            .map(|s| Segment { duration: s.duration * k, z_start: s.z_start * k, ..*s })
            .collect(),
    })
}

/// Applies the cyclic coordinate shift to every vector. Valid as a
/// regulation triple only for circulant `R`.
pub fn rotate_path(p: &RegulationTriple, shift: usize) -> RegulationTriple {
    RegulationTriple {
        origin: rotate(&p.origin, shift),
        segments: p
            .segments
            .iter()
            .map(|s| Segment {
                duration: s.duration,
                xdot: rotate(&s.xdot, shift),
                ydot: rotate(&s.ydot, shift),
                zdot: rotate(&s.zdot, shift),
                z_start: rotate(&s.z_start, shift),
            })
            .collect(),
    }
}

/// Concatenates `second` after `first`; `second` must start where `first`
/// ends.
pub fn merge_paths(first: &RegulationTriple, second: &RegulationTriple) -> Result<RegulationTriple, PathError> {
    let end = first.endpoint();
    if (end - second.origin).amax() > PATH_TOL {
        return Err(PathError::Discontinuous { end: end.into(), start: second.origin.into() });
    }
    let mut segments = first.segments.clone();
    segments.extend(second.segments.iter().copied());
    Ok(RegulationTriple { origin: first.origin, segments })
}
