//! Costs of one-piece paths and of the short gradual compositions.
//!
//! For isotropic covariance the one-piece reflected cost has the closed form
//! `‖Ad‖‖Aθ‖ − ⟨Aθ, Ad⟩` where `A = I − R_K (R_K'R_K)⁻¹ R_K'`. The formula
//! assumes unconstrained pushing; the optimal pushing rate is
//! `(‖Aθ‖/‖Ad‖) Bd − Bθ` and the formula is attained only when that vector
//! is nonnegative. [`CostModel::one_piece`] returns the true constrained
//! optimum by taking the best attained formula over subsets of `K`.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{unit, FaceSet, Mat3, ProblemData, Vec3};
use crate::minimize::{grid_compass, scan_golden};
use crate::oracle::segment::segment_cost_oracle;

/// Points per 1-D coarse scan.
pub const AXIS_SCAN: usize = 64;
/// Grid points per side for 2-D searches.
pub const FACE_GRID: usize = 32;
/// Grid minima refined by compass search.
pub const FACE_SEEDS: usize = 4;
/// Refinement tolerance on the search parameter, relative to the box.
pub const PARAM_TOL: f64 = 1e-10;
/// Search box side as a multiple of the target's norm.
pub const BOX_FACTOR: f64 = 4.0;

const MEMBER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("point {point:?} is outside the octant")]
    NotInOctant { point: [f64; 3] },
    #[error("point {point:?} is not on face set {faces}")]
    NotInFace { point: [f64; 3], faces: FaceSet },
    #[error("target {point:?} already lies on {faces}")]
    TargetOnFaceSet { point: [f64; 3], faces: FaceSet },
    #[error("face set {0} must have between {1} and {2} faces")]
    FaceSetSize(FaceSet, usize, usize),
    #[error("face {face} is not in {faces}")]
    FaceNotInSet { face: usize, faces: FaceSet },
    #[error("drift is zero")]
    ZeroDrift,
    #[error("displacement lies in the span of the reflection vectors")]
    DegenerateDisplacement,
    #[error("numeric segment minimization failed: {0}")]
    Numeric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    ClosedForm,
    Numeric,
}

/// `B = (R_K'R_K)⁻¹R_K'` (rows) and `A = I − R_K B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub faces: FaceSet,
    pub a: Mat3,
    pub b: Vec<Vec3>,
}

impl Projection {
    pub fn apply_b(&self, v: &Vec3) -> Vec<f64> {
        self.b.iter().map(|row| row.dot(v)).collect()
    }
}

/// Euclidean projection pair for the columns of `r` indexed by `k`.
pub fn projection(r: &Mat3, k: FaceSet) -> Projection {
    let cols: Vec<Vec3> = k.indices().map(|j| r.column(j).into_owned()).collect();
    let b: Vec<Vec3> = match cols.len() {
        0 => Vec::new(),
        1 => vec![cols[0] / cols[0].norm_squared()],
        2 => {
            let (c1, c2) = (cols[0], cols[1]);
            let (g11, g12, g22) = (c1.dot(&c1), c1.dot(&c2), c2.dot(&c2));
            let det = g11 * g22 - g12 * g12;
            vec![(c1 * g22 - c2 * g12) / det, (c2 * g11 - c1 * g12) / det]
        }
        _ => {
            let inv = r.try_inverse().unwrap_or_else(Mat3::zeros);
            (0..3).map(|i| inv.row(i).transpose()).collect()
        }
    };
    let mut a = Mat3::identity();
    for (c, row) in cols.iter().zip(&b) {
        a -= c * row.transpose();
    }
    Projection { faces: k, a, b }
}

/// `‖θ‖‖v−w‖ − ⟨θ, v−w⟩`.
pub fn direct_cost(w: &Vec3, v: &Vec3, data: &ProblemData) -> f64 {
    let d = v - w;
    let th = data.theta();
    (data.norm(th) * data.norm(&d) - data.inner(th, &d)).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReflectedCost {
    pub value: f64,
    pub provenance: Provenance,
    /// The closed form was used but its optimal pushing rate is not
    /// nonnegative, so the value only bounds the true cost from below.
    pub lower_bound_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reflectivity {
    pub vector: Vec<f64>,
    pub holds: bool,
}

/// Best one-piece path on `F_K`: cost, duration and pushing rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnePiece {
    pub cost: f64,
    pub duration: f64,
    pub ydot: Vec3,
    pub provenance: Provenance,
}

impl OnePiece {
    fn zero() -> Self {
        OnePiece { cost: 0.0, duration: 0.0, ydot: Vec3::zeros(), provenance: Provenance::ClosedForm }
    }
}

/// Intermediate points of a composite path, in travel order.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub value: f64,
    pub via: Vec<Vec3>,
}

struct ProjCache {
    p: Projection,
    a_theta: Vec3,
    b_theta: Vec<f64>,
    a_theta_norm: f64,
}

/// Problem data plus cached projections for every face set of size ≤ 2.
pub struct CostModel {
    data: ProblemData,
    iso: Option<f64>,
    theta_norm: f64,
    cache: Vec<Option<ProjCache>>,
}

impl CostModel {
    pub fn new(data: &ProblemData) -> Self {
        let iso = data.isotropic_scale();
        let cache = (0u8..8)
            .map(|bits| {
                let k = FaceSet::from_bits(bits);
                (k.len() <= 2).then(|| {
                    let p = projection(data.r(), k);
                    let a_theta = p.a * data.theta();
                    let b_theta = p.apply_b(data.theta());
                    ProjCache { a_theta_norm: a_theta.norm(), a_theta, b_theta, p }
                })
            })
            .collect();
        Self { theta_norm: data.norm(data.theta()), data: data.clone(), iso, cache }
    }

    pub fn data(&self) -> &ProblemData {
        &self.data
    }

    pub fn is_isotropic(&self) -> bool {
        self.iso.is_some()
    }

    fn proj(&self, k: FaceSet) -> &ProjCache {
        self.cache[k.bits() as usize].as_ref().expect("face set of size at most 2")
    }

    pub fn projection(&self, k: FaceSet) -> Result<&Projection, CostError> {
        check_size(k, 0, 2)?;
        Ok(&self.proj(k).p)
    }

    pub fn direct(&self, w: &Vec3, v: &Vec3) -> f64 {
        let d = v - w;
        (self.theta_norm * self.data.norm(&d) - self.data.inner(self.data.theta(), &d)).max(0.0)
    }

    /// Closed-form reflected cost for displacement `d` with pushing on all
    /// of `k`, divided by the isotropic scale. `None` when degenerate.
    fn formula(&self, k: FaceSet, d: &Vec3, c: f64) -> Option<(f64, f64, Vec<f64>)> {
        let pc = self.proj(k);
        let ad = pc.p.a * d;
        let nad = ad.norm();
        let nat = pc.a_theta_norm;
        let scale = d.norm().max(f64::MIN_POSITIVE);
        if nad <= 1e-13 * scale || nat <= 1e-13 * self.data.theta().norm() {
            return None;
        }
        let bd = pc.p.apply_b(d);
        let y: Vec<f64> = bd.iter().zip(&pc.b_theta).map(|(x, t)| nat / nad * x - t).collect();
        let cost = ((nad * nat - pc.a_theta.dot(&ad)) / c).max(0.0);
        Some((cost, nad / nat, y))
    }

    pub fn reflectivity(&self, k: FaceSet, d: &Vec3) -> Result<Reflectivity, CostError> {
        check_size(k, 1, 2)?;
        let (_, _, y) = self.formula(k, d, 1.0).ok_or(CostError::DegenerateDisplacement)?;
        Ok(Reflectivity { holds: y.iter().all(|&x| x > 0.0), vector: y })
    }

    pub fn reflected(&self, k: FaceSet, w: &Vec3, v: &Vec3) -> Result<ReflectedCost, CostError> {
        check_size(k, 0, 2)?;
        check_on(w, k)?;
        check_on(v, k)?;
        let d = v - w;
        if d.amax() == 0.0 {
            return Ok(ReflectedCost { value: 0.0, provenance: Provenance::ClosedForm, lower_bound_only: false });
        }
        match self.iso {
            Some(c) if !k.is_empty() => {
                let (value, _, y) = self.formula(k, &d, c).ok_or(CostError::DegenerateDisplacement)?;
                Ok(ReflectedCost {
                    value,
                    provenance: Provenance::ClosedForm,
                    lower_bound_only: !y.iter().all(|&x| x > 0.0),
                })
            }
            Some(_) => Ok(ReflectedCost {
                value: self.direct(w, v),
                provenance: Provenance::ClosedForm,
                lower_bound_only: false,
            }),
            None => {
                let s = segment_cost_oracle(w, v, k, &self.data).map_err(|e| CostError::Numeric(e.to_string()))?;
                Ok(ReflectedCost { value: s.cost, provenance: Provenance::Numeric, lower_bound_only: false })
            }
        }
    }

    /// Optimal one-piece path from `w` to `v` confined to `F_K` with
    /// nonnegative pushing on `K`.
    pub fn one_piece(&self, k: FaceSet, w: &Vec3, v: &Vec3) -> Result<OnePiece, CostError> {
        check_size(k, 0, 2)?;
        check_on(w, k)?;
        check_on(v, k)?;
        if self.theta_norm == 0.0 {
            return Err(CostError::ZeroDrift);
        }
        if self.iso.is_none() {
            let d = v - w;
            if d.amax() == 0.0 {
                return Ok(OnePiece::zero());
            }
            let s = segment_cost_oracle(w, v, k, &self.data).map_err(|e| CostError::Numeric(e.to_string()))?;
            return Ok(OnePiece { cost: s.cost, duration: s.duration, ydot: s.ydot, provenance: Provenance::Numeric });
        }
        Ok(self.one_piece_unchecked(k, &(v - w)))
    }

    /// [`Self::one_piece`] for isotropic data without membership checks.
    pub(crate) fn one_piece_unchecked(&self, k: FaceSet, d: &Vec3) -> OnePiece {
        let Some(c) = self.iso else {
            let w = Vec3::zeros();
            return segment_cost_oracle(&w, d, k, &self.data)
                .map(|s| OnePiece { cost: s.cost, duration: s.duration, ydot: s.ydot, provenance: Provenance::Numeric })
                .unwrap_or(OnePiece { cost: f64::INFINITY, ..OnePiece::zero() });
        };
        if d.amax() == 0.0 {
            return OnePiece::zero();
        }
        let dn = self.data.norm(d);
        let mut best = OnePiece {
            cost: (self.theta_norm * dn - self.data.inner(self.data.theta(), d)).max(0.0),
            duration: dn / self.theta_norm,
            ydot: Vec3::zeros(),
            provenance: Provenance::ClosedForm,
        };
        for j in k.subsets().into_iter().skip(1) {
            let Some((cost, duration, y)) = self.formula(j, d, c) else { continue };
            if y.iter().any(|&x| x < 0.0) || cost >= best.cost {
                continue;
            }
            let mut ydot = Vec3::zeros();
            for (n, i) in j.indices().enumerate() {
                ydot[i] = y[n];
            }
            best = OnePiece { cost, duration, ydot, provenance: Provenance::ClosedForm };
        }
        best
    }

    /// `inf_{w ∈ F_K} Ĩ_K(w) + Ĩ₀(w, v)`.
    pub fn two_piece_via_face(&self, k: FaceSet, v: &Vec3) -> Result<Composite, CostError> {
        check_size(k, 1, 2)?;
        check_octant(v)?;
        if on_faces(v, k) {
            return Err(CostError::TargetOnFaceSet { point: (*v).into(), faces: k });
        }
        let ext = extent(v);
        let f = |w: &Vec3| self.one_piece_unchecked(k, w).cost + self.direct(w, v);
        let (value, w) = if k.len() == 2 {
            min_over_axis(k.complement().indices().next().unwrap(), ext, f)
        } else {
            min_over_face(k.indices().next().unwrap(), ext, f)
        };
        Ok(Composite { value, via: vec![w] })
    }

    /// `inf_{w ∈ F_K} Ĩ_K(w) + Ĩ_i(w, v)` for an axis `K ∋ i` and `v ∈ F_i`.
    pub fn two_piece_via_axis(&self, k: FaceSet, i: usize, v: &Vec3) -> Result<Composite, CostError> {
        check_size(k, 2, 2)?;
        let fi = face_of(k, i)?;
        check_on(v, fi)?;
        let ext = extent(v);
        let m = k.complement().indices().next().unwrap();
        let (value, w) = min_over_axis(m, ext, |w| {
            self.one_piece_unchecked(k, w).cost + self.one_piece_unchecked(fi, &(v - w)).cost
        });
        Ok(Composite { value, via: vec![w] })
    }

    /// `inf_{u ∈ F_i} Ĩ²_{K,i}(u) + Ĩ₀(u, v)`.
    pub fn three_piece_gradual(&self, k: FaceSet, i: usize, v: &Vec3) -> Result<Composite, CostError> {
        check_size(k, 2, 2)?;
        let fi = face_of(k, i)?;
        check_octant(v)?;
        let ext = extent(v);
        let m = k.complement().indices().next().unwrap();
        let inner = |u: &Vec3| {
            min_over_axis(m, ext, |w| self.one_piece_unchecked(k, w).cost + self.one_piece_unchecked(fi, &(u - w)).cost)
        };
        let face = fi.indices().next().unwrap();
        let (value, u) = min_over_face(face, ext, |u| inner(u).0 + self.direct(u, v));
        let (_, w) = inner(&u);
        Ok(Composite { value, via: vec![w, u] })
    }
}

fn check_size(k: FaceSet, lo: usize, hi: usize) -> Result<(), CostError> {
    if k.len() < lo || k.len() > hi {
        return Err(CostError::FaceSetSize(k, lo, hi));
    }
    Ok(())
}

fn face_of(k: FaceSet, i: usize) -> Result<FaceSet, CostError> {
    let fi = FaceSet::of(&[i]).map_err(|_| CostError::FaceNotInSet { face: i, faces: k })?;
    if !fi.is_subset(k) {
        return Err(CostError::FaceNotInSet { face: i, faces: k });
    }
    Ok(fi)
}

fn check_octant(v: &Vec3) -> Result<(), CostError> {
    if v.iter().any(|&x| !(x >= -MEMBER_TOL)) {
        return Err(CostError::NotInOctant { point: (*v).into() });
    }
    Ok(())
}

fn on_faces(v: &Vec3, k: FaceSet) -> bool {
    k.indices().all(|j| v[j].abs() <= MEMBER_TOL)
}

fn check_on(v: &Vec3, k: FaceSet) -> Result<(), CostError> {
    check_octant(v)?;
    if !on_faces(v, k) {
        return Err(CostError::NotInFace { point: (*v).into(), faces: k });
    }
    Ok(())
}

/// Side of the search box for target `v`.
pub(crate) fn extent(v: &Vec3) -> f64 {
    BOX_FACTOR * v.norm().max(f64::MIN_POSITIVE)
}

/// Minimizes `f(t·e_m)` over `t ∈ [0, ext]`.
pub(crate) fn min_over_axis<F: Fn(&Vec3) -> f64>(m: usize, ext: f64, f: F) -> (f64, Vec3) {
    let e = unit(m);
    let r = scan_golden(|t| f(&(e * t)), 0.0, ext, AXIS_SCAN, PARAM_TOL * ext);
    (r.fx, e * r.x)
}

/// Minimizes `f(w)` over `w ∈ F_face` with free coordinates in `[0, ext]²`.
pub(crate) fn min_over_face<F: Fn(&Vec3) -> f64>(face: usize, ext: f64, f: F) -> (f64, Vec3) {
    let (p, q) = ((face + 1) % 3, (face + 2) % 3);
    let (p, q) = (p.min(q), p.max(q));
    let point = |x: [f64; 2]| {
        let mut w = Vec3::zeros();
        w[p] = x[0];
        w[q] = x[1];
        w
    };
    let r = grid_compass(|x| f(&point(x)), [0.0, 0.0], [ext, ext], FACE_GRID, FACE_SEEDS, PARAM_TOL * ext);
    (r.fx, point(r.x))
}

pub fn reflected_cost(k: FaceSet, w: &Vec3, v: &Vec3, data: &ProblemData) -> Result<ReflectedCost, CostError> {
    CostModel::new(data).reflected(k, w, v)
}

/// Optimal pushing rate of the closed form for displacement `d` on `F_K`.
pub fn reflectivity_check(k: FaceSet, d: &Vec3, data: &ProblemData) -> Result<Reflectivity, CostError> {
    CostModel::new(data).reflectivity(k, d)
}

pub fn one_piece_cost(k: FaceSet, w: &Vec3, v: &Vec3, data: &ProblemData) -> Result<OnePiece, CostError> {
    CostModel::new(data).one_piece(k, w, v)
}

pub fn two_piece_via_face(k: FaceSet, v: &Vec3, data: &ProblemData) -> Result<Composite, CostError> {
    CostModel::new(data).two_piece_via_face(k, v)
}

pub fn two_piece_via_axis(k: FaceSet, i: usize, v: &Vec3, data: &ProblemData) -> Result<Composite, CostError> {
    CostModel::new(data).two_piece_via_axis(k, i, v)
}

pub fn three_piece_gradual(k: FaceSet, i: usize, v: &Vec3, data: &ProblemData) -> Result<Composite, CostError> {
    CostModel::new(data).three_piece_gradual(k, i, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RsParams;

    fn example() -> ProblemData {
        RsParams::unit(-1.0, 1.5, 0.0).unwrap().expand()
    }

    fn fs(l: &[usize]) -> FaceSet {
        FaceSet::of(l).unwrap()
    }

    #[test]
    fn direct_cost_examples() {
        let d = RsParams::unit(-1.0, 0.0, 0.0).unwrap().expand();
        let c = direct_cost(&Vec3::zeros(), &unit(2), &d);
        assert!((c - (3f64.sqrt() + 1.0)).abs() < 1e-12);
        assert_eq!(direct_cost(&unit(0), &unit(0), &d), 0.0);
    }

    #[test]
    fn axis_projection_for_example() {
        let m = CostModel::new(&example());
        let p = m.projection(fs(&[1, 2])).unwrap();
        let at = p.a * Vec3::repeat(-1.0);
        let expect = Vec3::new(-9.0 / 19.0, 6.0 / 19.0, -4.0 / 19.0);
        assert!((at - expect).amax() < 1e-12, "{at:?}");
        let p2 = m.projection(fs(&[2])).unwrap();
        let expect2 = Mat3::new(1.0, 0.0, 0.0, 0.0, 9.0 / 13.0, -6.0 / 13.0, 0.0, -6.0 / 13.0, 4.0 / 13.0);
        assert!((p2.a - expect2).amax() < 1e-12);
    }

    #[test]
    fn reflected_axis_cost_and_reflectivity() {
        let d = example();
        let c = reflected_cost(fs(&[1, 2]), &Vec3::zeros(), &unit(2), &d).unwrap();
        assert!((c.value - 8.0 / 19.0).abs() < 1e-12);
        assert!(!c.lower_bound_only);
        let r = reflectivity_check(fs(&[1, 2]), &unit(2), &d).unwrap();
        assert!(r.holds);
        assert!((r.vector[0] - 1.0 / 19.0).abs() < 1e-12);
        assert!((r.vector[1] - 59.0 / 38.0).abs() < 1e-12);
    }

    #[test]
    fn one_piece_matches_formula_when_reflective() {
        let d = example();
        let m = CostModel::new(&d);
        let op = m.one_piece(fs(&[1, 2]), &Vec3::zeros(), &unit(2)).unwrap();
        assert!((op.cost - 8.0 / 19.0).abs() < 1e-12);
        assert!(op.ydot[0] > 0.0 && op.ydot[1] > 0.0 && op.ydot[2] == 0.0);
    }

    #[test]
    fn identity_axis_cost_is_two() {
        let d = RsParams::unit(-1.0, 0.0, 0.0).unwrap().expand();
        let c = reflected_cost(fs(&[1, 2]), &Vec3::zeros(), &unit(2), &d).unwrap();
        assert!((c.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn witness_two_piece_value() {
        let d = example();
        let m = CostModel::new(&d);
        let u = Vec3::new(0.5, 0.0, 0.0);
        let a = m.one_piece(fs(&[2, 3]), &Vec3::zeros(), &u).unwrap().cost;
        let b = m.one_piece(fs(&[2]), &u, &unit(2)).unwrap().cost;
        assert!((a + b - 0.331_658_688).abs() < 1e-8, "{}", a + b);
    }

    #[test]
    fn spiral_leg_value() {
        let d = example();
        let k = 0.5363;
        let c = reflected_cost(fs(&[2]), &(unit(0) * k), &unit(2), &d).unwrap();
        assert!((c.value - 0.11054).abs() < 1e-5);
    }

    #[test]
    fn two_piece_via_axis_beats_axis() {
        let d = example();
        let c = two_piece_via_axis(fs(&[2, 3]), 2, &unit(2), &d).unwrap();
        assert!(c.value < 8.0 / 19.0);
        assert!(c.value <= 0.331_658_688 + 1e-9);
    }

    #[test]
    fn membership_errors() {
        let d = example();
        assert!(matches!(
            reflected_cost(fs(&[1, 2]), &Vec3::zeros(), &Vec3::new(1.0, 0.0, 1.0), &d),
            Err(CostError::NotInFace { .. })
        ));
        assert!(matches!(
            two_piece_via_face(fs(&[1]), &Vec3::new(0.0, 1.0, 1.0), &d),
            Err(CostError::TargetOnFaceSet { .. })
        ));
        assert!(matches!(
            two_piece_via_axis(fs(&[1, 2]), 3, &unit(2), &d),
            Err(CostError::FaceNotInSet { .. })
        ));
        assert!(matches!(
            two_piece_via_face(fs(&[1, 2, 3]), &Vec3::repeat(1.0), &d),
            Err(CostError::FaceSetSize(..))
        ));
    }

    #[test]
    fn nonisotropic_falls_back_to_numeric() {
        let d = RsParams::new(-1.0, 0.5, 0.2, 1.0, 0.3).unwrap().expand();
        let c = reflected_cost(fs(&[1]), &Vec3::zeros(), &Vec3::new(0.0, 1.0, 2.0), &d).unwrap();
        assert_eq!(c.provenance, Provenance::Numeric);
        assert!(c.value > 0.0);
    }
}
