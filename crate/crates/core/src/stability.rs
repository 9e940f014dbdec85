//! Positive recurrence of the reflected process for rotationally symmetric
//! data: completely-S and P-matrix tests, the linear complementarity
//! problem, the β ratio, and the region-based decision flow.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{rs_r_inverse, FaceSet, Mat3, RsParams, Vec3};

/// Half-width of the band around region boundaries inside which the β
/// shortcut is skipped.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("beta ratio needs r1<1<r2 or r2<1<r1, got r1={r1}, r2={r2}")]
    NotInBetaRegion { r1: f64, r2: f64 },
    #[error("beta ratio needs theta0 < 0, got {0}")]
    NonNegativeDrift(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// `r1 < 1 < r2`
    C1,
    /// `r2 < 1 < r1`
    C2,
    /// `r1, r2 ≥ 1`, excluding `(1,1)`
    C3,
    /// `r1, r2 ≤ 1`, excluding `(1,1)`
    C4,
    /// `r1 = r2 = 1`, where `R` is singular
    SingularPoint,
}

pub fn region_of(r1: f64, r2: f64) -> Region {
    if r1 == 1.0 && r2 == 1.0 {
        Region::SingularPoint
    } else if r1 < 1.0 && r2 > 1.0 {
        Region::C1
    } else if r1 > 1.0 && r2 < 1.0 {
        Region::C2
    } else if r1 >= 1.0 && r2 >= 1.0 {
        Region::C3
    } else {
        Region::C4
    }
}

fn lp_2x2_s(a: f64, b: f64, c: f64, d: f64) -> bool {
    // u = (1, t) with t > 0; each row gives a half-line in t.
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for (alpha, beta) in [(a, b), (c, d)] {
        if beta > 0.0 {
            lo = lo.max(-alpha / beta);
        } else if beta < 0.0 {
            hi = hi.min(-alpha / beta);
        } else if alpha <= 0.0 {
            return false;
        }
    }
    lo < hi
}

/// Exact S-matrix test for a square matrix of size `k ≤ 3`: maximize `t`
/// subject to `Su ≥ t`, `u ≥ t`, `Σu = 1` by enumerating vertices, and
/// report whether the optimum is positive.
pub fn is_s_matrix(s: &DMatrix<f64>) -> bool {
    let k = s.nrows();
    if k == 1 {
        return s[(0, 0)] > 0.0;
    }
    // Fast path: u = 1.
    if (0..k).all(|i| s.row(i).sum() > 0.0) {
        return true;
    }
    let m = 2 * k;
    let mut best = f64::NEG_INFINITY;
    // Rows of the inequality system G [u; t] ≥ 0.
    let g = |row: usize| -> DVector<f64> {
        let mut out = DVector::zeros(k + 1);
        if row < k {
            for j in 0..k {
                out[j] = s[(row, j)];
            }
        } else {
            out[row - k] = 1.0;
        }
        out[k] = -1.0;
        out
    };
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut a = DMatrix::zeros(k + 1, k + 1);
        let mut rhs = DVector::zeros(k + 1);
        let mut r = 0;
        for row in 0..m {
            if mask & (1 << row) != 0 {
                a.set_row(r, &g(row).transpose());
                r += 1;
            }
        }
        for j in 0..k {
            a[(k, j)] = 1.0;
        }
        rhs[k] = 1.0;
        let Some(x) = a.clone().lu().solve(&rhs) else { continue };
        if x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let feasible = (0..m).all(|row| g(row).dot(&x) >= -1e-12);
        if feasible && x[k] > best {
            best = x[k];
        }
    }
    best > 1e-12
}

fn principal(r: &Mat3, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| r[(idx[i], idx[j])])
}

/// Every principal submatrix is an S-matrix.
pub fn is_completely_s(r: &Mat3) -> bool {
    for f in FaceSet::from_bits(0b111).subsets().into_iter().skip(1) {
        let idx: Vec<usize> = f.indices().collect();
        let ok = match idx.len() {
            1 => r[(idx[0], idx[0])] > 0.0,
            2 => {
                let (i, j) = (idx[0], idx[1]);
                lp_2x2_s(r[(i, i)], r[(i, j)], r[(j, i)], r[(j, j)])
            }
            _ => is_s_matrix(&principal(r, &idx)),
        };
        if !ok {
            return false;
        }
    }
    true
}

/// All seven principal minors are positive.
pub fn is_p_matrix(r: &Mat3) -> bool {
    FaceSet::from_bits(0b111)
        .subsets()
        .into_iter()
        .skip(1)
        .all(|f| principal(r, &f.indices().collect::<Vec<_>>()).determinant() > 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolutionKind {
    Stable,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcpSolution {
    /// Coordinates where `u` may be nonzero.
    #[serde(serialize_with = "ser_faces")]
    pub support: FaceSet,
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub kind: SolutionKind,
}

fn ser_faces<S: serde::Serializer>(f: &FaceSet, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(f.labels())
}

fn ser_face_vec<S: serde::Serializer>(f: &[FaceSet], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(f.iter().map(|x| x.labels()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct LcpResult {
    pub solutions: Vec<LcpSolution>,
    /// Supports whose principal block is singular; not enumerated.
    #[serde(serialize_with = "ser_face_vec")]
    pub degenerate_supports: Vec<FaceSet>,
}

impl LcpResult {
    pub fn has_divergent(&self) -> bool {
        self.solutions.iter().any(|s| s.kind == SolutionKind::Divergent)
    }
}

/// Enumerates the eight complementary supports of `v = θ + Ru`, `u, v ≥ 0`,
/// `u·v = 0`.
pub fn solve_lcp(theta: &Vec3, r: &Mat3) -> LcpResult {
    let scale = theta.amax().max(1.0) * r.amax().max(1.0);
    let tol = 1e-9 * scale;
    let mut out = LcpResult::default();
    for s in FaceSet::from_bits(0b111).subsets() {
        let idx: Vec<usize> = s.indices().collect();
        let mut u = Vec3::zeros();
        if !idx.is_empty() {
            let block = principal(r, &idx);
            if block.determinant().abs() <= 1e-12 {
                out.degenerate_supports.push(s);
                continue;
            }
            let rhs = DVector::from_iterator(idx.len(), idx.iter().map(|&i| -theta[i]));
            let Some(sol) = block.lu().solve(&rhs) else {
                out.degenerate_supports.push(s);
                continue;
            };
            for (k, &i) in idx.iter().enumerate() {
                u[i] = sol[k];
            }
        }
        let mut v = theta + r * u;
        for &i in &idx {
            v[i] = 0.0;
        }
        if u.iter().any(|&x| x < -tol) || v.iter().any(|&x| x < -tol) {
            continue;
        }
        let kind = if v.iter().all(|&x| x.abs() <= tol) {
            SolutionKind::Stable
        } else {
            SolutionKind::Divergent
        };
        out.solutions.push(LcpSolution { support: s, u: u.into(), v: v.into(), kind });
    }
    out
}

/// `((1−r2)/(r1−1))³` on C1 and `((r1−1)/(1−r2))³` on C2.
pub fn beta_ratio(theta0: f64, r1: f64, r2: f64) -> Result<f64, StabilityError> {
    if !(theta0 < 0.0) {
        return Err(StabilityError::NonNegativeDrift(theta0));
    }
    match region_of(r1, r2) {
        Region::C1 => Ok(((1.0 - r2) / (r1 - 1.0)).powi(3)),
        Region::C2 => Ok(((r1 - 1.0) / (1.0 - r2)).powi(3)),
        _ => Err(StabilityError::NotInBetaRegion { r1, r2 }),
    }
}

/// `θ0 < 0` and `−1 < r1 + r2 < 2`.
pub fn closed_form_stable(theta0: f64, r1: f64, r2: f64) -> bool {
    theta0 < 0.0 && r1 + r2 > -1.0 && r1 + r2 < 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    NotCompletelyS,
    SingularReflection,
    DriftCondition,
    Beta,
    Lcp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub completely_s: bool,
    pub p_matrix: bool,
    pub r_inv_theta_negative: bool,
    pub region: Region,
    pub beta: Option<f64>,
    pub lcp: LcpResult,
    pub stable: bool,
    pub closed_form_stable: bool,
    pub decided_by: Route,
}

pub fn classify_stability(p: &RsParams) -> StabilityReport {
    let r = p.reflection_matrix();
    let theta = p.drift();
    let completely_s = is_completely_s(&r);
    let p_matrix = is_p_matrix(&r);
    let region = region_of(p.r1, p.r2);
    let lcp = solve_lcp(&theta, &r);
    let r_inv_theta_negative = rs_r_inverse(p.r1, p.r2)
        .map(|inv| (inv.matrix() * theta).iter().all(|&x| x < 0.0))
        .unwrap_or(false);
    let on_beta_boundary = (p.r1 + p.r2 - 2.0).abs() <= BOUNDARY_TOL;
    let mut beta = None;
    let (stable, decided_by) = if !completely_s {
        (false, Route::NotCompletelyS)
    } else if region == Region::SingularPoint {
        (false, Route::SingularReflection)
    } else if !r_inv_theta_negative {
        (false, Route::DriftCondition)
    } else if matches!(region, Region::C1 | Region::C2) {
        let b = beta_ratio(p.theta0, p.r1, p.r2).expect("region and drift checked");
        beta = Some(b);
        // On r1 + r2 = 2 the ratio is exactly 1; rounding must not tip it.
        (b < 1.0 && !on_beta_boundary, Route::Beta)
    } else {
        (!lcp.has_divergent(), Route::Lcp)
    };
    StabilityReport {
        completely_s,
        p_matrix,
        r_inv_theta_negative,
        region,
        beta,
        lcp,
        stable,
        closed_form_stable: closed_form_stable(p.theta0, p.r1, p.r2),
        decided_by,
    }
}
