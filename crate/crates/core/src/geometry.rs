//! Problem data for the octant: drift, covariance, reflection matrix, and
//! the rotationally symmetric parametrization.
//!
//! Coordinates are indexed `0..3` internally. Faces and axes are labelled
//! `1..=3` in [`FaceSet`], matching how they are usually written down.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Relative tolerance for symmetry and structural checks.
pub const STRUCT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("covariance is not symmetric")]
    NotSymmetric,
    #[error("covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("correlation {0} outside (-1/2, 1); covariance would not be positive definite")]
    CorrelationOutOfRange(f64),
    #[error("reflection matrix is singular at r1={r1}, r2={r2}")]
    SingularReflection { r1: f64, r2: f64 },
    #[error("face label {0} not in 1..=3")]
    BadFaceLabel(usize),
    #[error("data is not rotationally symmetric")]
    NotRotationallySymmetric,
}

/// Rotationally symmetric parameters: drift `(θ0,θ0,θ0)`, circulant
/// reflection matrix with off-diagonals `r1, r2`, and covariance
/// `σ²` on the diagonal with correlation `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsParams {
    pub theta0: f64,
    pub r1: f64,
    pub r2: f64,
    #[serde(default = "unit_variance")]
    pub sigma2: f64,
    #[serde(default)]
    pub rho: f64,
}

fn unit_variance() -> f64 {
    1.0
}

impl RsParams {
    pub fn new(theta0: f64, r1: f64, r2: f64, sigma2: f64, rho: f64) -> Result<Self, GeometryError> {
        let p = Self { theta0, r1, r2, sigma2, rho };
        p.check()?;
        Ok(p)
    }

    /// Identity covariance.
    pub fn unit(theta0: f64, r1: f64, r2: f64) -> Result<Self, GeometryError> {
        Self::new(theta0, r1, r2, 1.0, 0.0)
    }

    pub fn check(&self) -> Result<(), GeometryError> {
        for (name, x) in [
            ("theta0", self.theta0),
            ("r1", self.r1),
            ("r2", self.r2),
            ("sigma2", self.sigma2),
            ("rho", self.rho),
        ] {
            if !x.is_finite() {
                return Err(GeometryError::NonFinite(name));
            }
        }
        if self.sigma2 <= 0.0 {
            return Err(GeometryError::NonPositiveVariance(self.sigma2));
        }
        if !(self.rho > -0.5 && self.rho < 1.0) {
            return Err(GeometryError::CorrelationOutOfRange(self.rho));
        }
        Ok(())
    }

    /// `[[1,r2,r1],[r1,1,r2],[r2,r1,1]]`; column `j` is the reflection
    /// vector on face `j+1`.
    pub fn reflection_matrix(&self) -> Mat3 {
        let (a, b) = (self.r1, self.r2);
        Mat3::new(1.0, b, a, a, 1.0, b, b, a, 1.0)
    }

    pub fn covariance(&self) -> Mat3 {
        let s = self.sigma2;
        let c = self.rho * s;
        Mat3::new(s, c, c, c, s, c, c, c, s)
    }

    pub fn drift(&self) -> Vec3 {
        Vec3::repeat(self.theta0)
    }

    pub fn is_identity_covariance(&self) -> bool {
        self.sigma2 == 1.0 && self.rho == 0.0
    }

    pub fn expand(&self) -> ProblemData {
        let g = rs_gamma_inverse(self.rho).expect("rho validated at construction");
        let s = 1.0 / self.sigma2;
        let (d, o) = (g.gamma0 * s, g.gamma1 * s);
        ProblemData {
            theta: self.drift(),
            gamma: self.covariance(),
            r: self.reflection_matrix(),
            gamma_inv: Mat3::new(d, o, o, o, d, o, o, o, d),
        }
    }
}

/// General problem data with cached `Γ⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    theta: Vec3,
    gamma: Mat3,
    r: Mat3,
    gamma_inv: Mat3,
}

impl ProblemData {
    pub fn new(theta: Vec3, gamma: Mat3, r: Mat3) -> Result<Self, GeometryError> {
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite("theta"));
        }
        if gamma.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite("Gamma"));
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite("R"));
        }
        let scale = gamma.amax().max(f64::MIN_POSITIVE);
        if (gamma - gamma.transpose()).amax() > STRUCT_TOL * scale {
            return Err(GeometryError::NotSymmetric);
        }
        let chol = gamma.cholesky().ok_or(GeometryError::NotPositiveDefinite)?;
        let gamma_inv = chol.inverse();
        Ok(Self { theta, gamma, r, gamma_inv })
    }

    pub fn theta(&self) -> &Vec3 {
        &self.theta
    }

    pub fn gamma(&self) -> &Mat3 {
        &self.gamma
    }

    pub fn r(&self) -> &Mat3 {
        &self.r
    }

    pub fn gamma_inv(&self) -> &Mat3 {
        &self.gamma_inv
    }

    /// `⟨v,w⟩ = v'Γ⁻¹w`.
    pub fn inner(&self, v: &Vec3, w: &Vec3) -> f64 {
        v.dot(&(self.gamma_inv * w))
    }

    pub fn norm(&self, v: &Vec3) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// `Some(c)` when `Γ = c·I`.
    pub fn isotropic_scale(&self) -> Option<f64> {
        let c = self.gamma[(0, 0)];
        let dev = (self.gamma - Mat3::identity() * c).amax();
        (dev <= STRUCT_TOL * c.abs()).then_some(c)
    }

    /// Recovers rotationally symmetric parameters when the data has that
    /// structure.
    pub fn to_rs(&self) -> Result<RsParams, GeometryError> {
        let t = self.theta[0];
        let r = &self.r;
        let g = &self.gamma;
        let close = |a: f64, b: f64| (a - b).abs() <= STRUCT_TOL * (1.0 + a.abs().max(b.abs()));
        let sigma2 = g[(0, 0)];
        let c = g[(0, 1)];
        let ok = self.theta.iter().all(|&x| close(x, t))
            && (0..3).all(|i| close(r[(i, i)], 1.0))
            && (0..3).all(|i| close(r[(i, (i + 1) % 3)], r[(0, 1)]))
            && (0..3).all(|i| close(r[(i, (i + 2) % 3)], r[(0, 2)]))
            && (0..3).all(|i| close(g[(i, i)], sigma2))
            && (0..3).all(|i| (0..3).all(|j| i == j || close(g[(i, j)], c)));
        if !ok {
            return Err(GeometryError::NotRotationallySymmetric);
        }
        RsParams::new(t, r[(0, 2)], r[(0, 1)], sigma2, c / sigma2)
    }
}

/// Problem data as read from JSON. Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemJson {
    Rs(RsParams),
    General {
        theta: [f64; 3],
        #[serde(rename = "Gamma")]
        gamma: [[f64; 3]; 3],
        #[serde(rename = "R")]
        r: [[f64; 3]; 3],
    },
}

fn rows(m: &[[f64; 3]; 3]) -> Mat3 {
    Mat3::from_fn(|i, j| m[i][j])
}

impl ProblemJson {
    pub fn data(&self) -> Result<ProblemData, GeometryError> {
        match self {
            ProblemJson::Rs(p) => {
                p.check()?;
                Ok(p.expand())
            }
            ProblemJson::General { theta, gamma, r } => ProblemData::new(Vec3::from(*theta), rows(gamma), rows(r)),
        }
    }

    /// Rotationally symmetric parameters, recovered from general input when
    /// it has that structure.
    pub fn rs(&self) -> Result<RsParams, GeometryError> {
        match self {
            ProblemJson::Rs(p) => {
                p.check()?;
                Ok(*p)
            }
            ProblemJson::General { .. } => self.data()?.to_rs(),
        }
    }
}

impl From<&ProblemData> for ProblemJson {
    fn from(d: &ProblemData) -> Self {
        let m = |a: &Mat3| [0, 1, 2].map(|i| [0, 1, 2].map(|j| a[(i, j)]));
        ProblemJson::General { theta: (*d.theta()).into(), gamma: m(d.gamma()), r: m(d.r()) }
    }
}

impl From<RsParams> for ProblemData {
    fn from(p: RsParams) -> Self {
        p.expand()
    }
}

/// Entries of `σ²Γ⁻¹` for the rotationally symmetric covariance: `γ0` on
/// the diagonal, `γ1` off it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaCoeffs {
    pub gamma0: f64,
    pub gamma1: f64,
}

pub fn rs_gamma_inverse(rho: f64) -> Result<GammaCoeffs, GeometryError> {
    if !rho.is_finite() {
        return Err(GeometryError::NonFinite("rho"));
    }
    if !(rho > -0.5 && rho < 1.0) {
        return Err(GeometryError::CorrelationOutOfRange(rho));
    }
    let den = (1.0 - rho) * (1.0 + 2.0 * rho);
    Ok(GammaCoeffs { gamma0: (1.0 + rho) / den, gamma1: -rho / den })
}

/// Inverse of the circulant reflection matrix, itself circulant with rows
/// `[a,b,c],[c,a,b],[b,c,a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirculantInverse {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CirculantInverse {
    pub fn matrix(&self) -> Mat3 {
        let (a, b, c) = (self.a, self.b, self.c);
        Mat3::new(a, b, c, c, a, b, b, c, a)
    }
}

/// `det R = 1 + r1³ + r2³ − 3 r1 r2`.
pub fn rs_det(r1: f64, r2: f64) -> f64 {
    1.0 + r1.powi(3) + r2.powi(3) - 3.0 * r1 * r2
}

pub fn rs_r_inverse(r1: f64, r2: f64) -> Result<CirculantInverse, GeometryError> {
    if !r1.is_finite() || !r2.is_finite() {
        return Err(GeometryError::NonFinite("R"));
    }
    let det = rs_det(r1, r2);
    let scale = 1.0 + r1.abs().powi(3) + r2.abs().powi(3);
    if det.abs() <= 1e-12 * scale {
        return Err(GeometryError::SingularReflection { r1, r2 });
    }
    Ok(CirculantInverse {
        a: (1.0 - r1 * r2) / det,
        b: (r1 * r1 - r2) / det,
        c: (r2 * r2 - r1) / det,
    })
}

/// Skew-symmetry condition `2Γ = R D⁻¹Λ + ΛD⁻¹R'` with `D = diag R`,
/// `Λ = diag Γ`. Returns false when `R` has a zero diagonal entry.
pub fn is_skew_symmetric(data: &ProblemData) -> bool {
    let r = data.r();
    let g = data.gamma();
    if (0..3).any(|i| r[(i, i)] == 0.0) {
        return false;
    }
    let dl = Mat3::from_diagonal(&Vec3::new(
        g[(0, 0)] / r[(0, 0)],
        g[(1, 1)] / r[(1, 1)],
        g[(2, 2)] / r[(2, 2)],
    ));
    let rhs = r * dl + dl * r.transpose();
    let lhs = g * 2.0;
    let scale = lhs.amax().max(rhs.amax()).max(f64::MIN_POSITIVE);
    (lhs - rhs).amax() <= STRUCT_TOL * scale
}

/// Cyclic coordinate shift: `(a,b,c) ↦ (b,c,a)` applied `shift` times.
pub fn rotate(v: &Vec3, shift: usize) -> Vec3 {
    let s = shift % 3;
    Vec3::new(v[s % 3], v[(s + 1) % 3], v[(s + 2) % 3])
}

/// Unit vector along coordinate `i` (0-based).
pub fn unit(i: usize) -> Vec3 {
    let mut e = Vec3::zeros();
    e[i] = 1.0;
    e
}

/// Subset of `{1,2,3}`: the faces a point is pinned to. `{}` is the
/// interior, one label a face, two labels an axis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FaceSet(u8);

impl FaceSet {
    pub const EMPTY: FaceSet = FaceSet(0);

    /// Builds from 1-based face labels.
    pub fn of(labels: &[usize]) -> Result<Self, GeometryError> {
        let mut bits = 0u8;
        for &l in labels {
            if !(1..=3).contains(&l) {
                return Err(GeometryError::BadFaceLabel(l));
            }
            bits |= 1 << (l - 1);
        }
        Ok(FaceSet(bits))
    }

    /// Builds from 0-based coordinate indices.
    pub fn from_indices(idx: &[usize]) -> Self {
        FaceSet(idx.iter().fold(0u8, |b, &i| b | (1 << i)))
    }

    pub fn from_bits(bits: u8) -> Self {
        FaceSet(bits & 0b111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 3 && self.0 & (1 << i) != 0
    }

    /// 0-based indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..3).filter(move |&i| self.contains(i))
    }

    /// 1-based labels in increasing order.
    pub fn labels(self) -> Vec<usize> {
        self.indices().map(|i| i + 1).collect()
    }

    pub fn complement(self) -> Self {
        FaceSet(!self.0 & 0b111)
    }

    pub fn is_subset(self, other: FaceSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// All subsets, smallest first.
    pub fn subsets(self) -> Vec<FaceSet> {
        let mut out: Vec<FaceSet> =
            (0u8..8).filter(|&b| b & !self.0 == 0).map(FaceSet).collect();
        out.sort_by_key(|f| (f.len(), f.0));
        out
    }

    /// Image under [`rotate`] by `shift`: coordinate `i` moves to `i - shift`.
    pub fn rotated(self, shift: usize) -> Self {
        let s = shift % 3;
        FaceSet::from_indices(&self.indices().map(|i| (i + 3 - s) % 3).collect::<Vec<_>>())
    }

    /// Faces `v` lies on, with `tol` absolute.
    pub fn of_point(v: &Vec3, tol: f64) -> Self {
        FaceSet::from_indices(&(0..3).filter(|&i| v[i].abs() <= tol).collect::<Vec<_>>())
    }
}

impl fmt::Debug for FaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FaceSet{:?}", self.labels())
    }
}

impl fmt::Display for FaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l: Vec<String> = self.labels().iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", l.join(","))
    }
}
