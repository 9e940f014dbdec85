//! Gradual-versus-spiral classification and least-cost paths.
//!
//! A classic spiral reaches `e3` through the axis points
//! `… → k²·e2 → k·e1 → e3`, each turn a rotated, `k`-scaled copy of the last
//! segment. Its cost is `f(k) = Ĩ_face(e3 − k·e_prev) / (1 − k)`.

use serde::Serialize;
use thiserror::Error;

use crate::costs::{extent, min_over_axis, min_over_face, CostError, CostModel, OnePiece, Reflectivity};
use crate::geometry::{unit, FaceSet, GeometryError, RsParams, Vec3};
use crate::minimize::scan_golden;
use crate::paths::{merge_paths, path_cost, rotate_path, scale_path, validate_triple, PathError, RegulationTriple, Segment, Violation};
use crate::stability::{classify_stability, StabilityReport};

/// Shrink factors scanned on `[K_LO, K_HI]`.
pub const K_LO: f64 = 1e-4;
pub const K_HI: f64 = 1.0 - 1e-4;
pub const K_SCAN: usize = 128;
pub const K_TOL: f64 = 1e-10;
/// Truncate when `k^n · total` drops below this.
pub const TAIL_TARGET: f64 = 1e-9;
pub const MAX_TURNS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("constructed path is not a regulation triple: {0}")]
    InvalidPath(Violation),
    #[error("unstable: no stationary process for theta0={theta0}, r1={r1}, r2={r2}")]
    Unstable { theta0: f64, r1: f64, r2: f64, report: Box<StabilityReport> },
    #[error("closed forms need isotropic covariance (rho = 0), got rho={0}")]
    NonIsotropic(f64),
    #[error("spiral degenerates for {0:?}: f has no interior minimizer on (0,1)")]
    SpiralDegenerates(Orientation),
    #[error("target {0:?} is outside the octant")]
    NotInOctant([f64; 3]),
}

/// `(1+r2²)(1+r1²−r2−r1r2)² − 2(r1r2)²(1+r1²+r2²−r1−r2−r1r2)`.
pub fn condition1_margin(r1: f64, r2: f64) -> f64 {
    let q = 1.0 + r1 * r1 + r2 * r2 - r1 - r2 - r1 * r2;
    (1.0 + r2 * r2) * (1.0 + r1 * r1 - r2 - r1 * r2).powi(2) - 2.0 * (r1 * r2).powi(2) * q
}

/// `r1 > r2 ≥ 0`, `−1 < r1 + r2 < 2`, and the margin is nonnegative.
pub fn condition1(r1: f64, r2: f64) -> bool {
    r2 >= 0.0 && r1 > r2 && r1 + r2 > -1.0 && r1 + r2 < 2.0 && condition1_margin(r1, r2) >= 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// Last segment runs from `k·e1` to `e3` on face 2.
    ViaF2,
    /// Last segment runs from `k·e2` to `e3` on face 1.
    ViaF1,
}

impl Orientation {
    pub const ALL: [Orientation; 2] = [Orientation::ViaF2, Orientation::ViaF1];

    /// 0-based face index carrying the repeated segment.
    fn face(self) -> usize {
        match self {
            Orientation::ViaF2 => 1,
            Orientation::ViaF1 => 0,
        }
    }

    /// 0-based axis the last segment starts from.
    fn prev_axis(self) -> usize {
        match self {
            Orientation::ViaF2 => 0,
            Orientation::ViaF1 => 1,
        }
    }

    /// Rotation taking `e3` to `e_prev`; one turn outward.
    fn step_shift(self) -> usize {
        match self {
            Orientation::ViaF2 => 2,
            Orientation::ViaF1 => 1,
        }
    }

    /// Axis `F_K` holding `e_prev`.
    pub fn prev_axis_faces(self) -> FaceSet {
        FaceSet::from_indices(&[self.face(), 2])
    }

    pub fn face_set(self) -> FaceSet {
        FaceSet::from_indices(&[self.face()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpiralSolution {
    pub k_star: f64,
    pub orientation: Orientation,
    /// `Ĩ_face(e3 − k*·e_prev)`.
    pub per_turn_cost: f64,
    /// `per_turn_cost / (1 − k*)`.
    pub total_cost: f64,
    #[serde(skip)]
    pub truncated_path: RegulationTriple,
    pub truncation_turns: usize,
    pub truncated_cost: f64,
    /// Bound on `|truncated_cost − total_cost|`.
    pub tail_bound: f64,
}

fn require_isotropic(p: &RsParams) -> Result<(), SolverError> {
    p.check()?;
    if p.rho != 0.0 {
        return Err(SolverError::NonIsotropic(p.rho));
    }
    Ok(())
}

fn turn_cost(model: &CostModel, o: Orientation, k: f64) -> OnePiece {
    let d = unit(2) - unit(o.prev_axis()) * k;
    model.one_piece_unchecked(o.face_set(), &d)
}

/// `f(k)` for the given orientation.
pub fn spiral_cost(params: &RsParams, o: Orientation, k: f64) -> Result<f64, SolverError> {
    require_isotropic(params)?;
    let model = CostModel::new(&params.expand());
    Ok(turn_cost(&model, o, k).cost / (1.0 - k))
}

fn spiral_in(model: &CostModel, o: Orientation) -> Result<SpiralSolution, SolverError> {
    let f = |k: f64| turn_cost(model, o, k).cost / (1.0 - k);
    let m = scan_golden(f, K_LO, K_HI, K_SCAN, K_TOL);
    if m.x <= K_LO + 1e-9 || m.x >= K_HI - 1e-9 {
        return Err(SolverError::SpiralDegenerates(o));
    }
    let turns = turns_for(m.x, m.fx);
    build_spiral_in(model, o, m.x, turns)
}

/// Smallest `n` with `k^n · total < TAIL_TARGET`, capped at `MAX_TURNS`.
pub fn turns_for(k: f64, total: f64) -> usize {
    let mut n = 1;
    while n < MAX_TURNS && k.powi(n as i32) * total >= TAIL_TARGET {
        n += 1;
    }
    n
}

pub fn optimize_spiral(params: &RsParams, o: Orientation) -> Result<SpiralSolution, SolverError> {
    require_isotropic(params)?;
    spiral_in(&CostModel::new(&params.expand()), o)
}

/// Assembles the `turns`-turn spiral to `e3` with shrink factor `k`.
pub fn build_spiral(params: &RsParams, o: Orientation, k: f64, turns: usize) -> Result<SpiralSolution, SolverError> {
    require_isotropic(params)?;
    build_spiral_in(&CostModel::new(&params.expand()), o, k, turns)
}

fn build_spiral_in(model: &CostModel, o: Orientation, k: f64, turns: usize) -> Result<SpiralSolution, SolverError> {
    let data = model.data();
    let r = data.r();
    let start = unit(o.prev_axis()) * k;
    let op = turn_cost(model, o, k);
    let base = RegulationTriple::single(Segment::between(start, unit(2), op.duration, op.ydot, r)?);
    let mut turns_out: Vec<RegulationTriple> = Vec::with_capacity(turns);
    for j in 0..turns {
        let rotated = rotate_path(&base, (j * o.step_shift()) % 3);
        turns_out.push(scale_path(&rotated, k.powi(j as i32))?);
    }
    let inner = turns_out.last().map_or(unit(2), |t| t.origin);
    let mut path = direct_path(model, &Vec3::zeros(), &inner)?;
    for t in turns_out.iter().rev() {
        path = merge_paths(&path, t)?;
    }
    validate_triple(&path, data).map_err(SolverError::InvalidPath)?;
    let truncated_cost = path_cost(&path, data)?;
    let total_cost = op.cost / (1.0 - k);
    let axis_direct = model.direct(&Vec3::zeros(), &unit(0));
    Ok(SpiralSolution {
        k_star: k,
        orientation: o,
        per_turn_cost: op.cost,
        total_cost,
        truncated_path: path,
        truncation_turns: turns,
        truncated_cost,
        tail_bound: k.powi(turns as i32) * total_cost.max(axis_direct),
    })
}

fn direct_path(model: &CostModel, w: &Vec3, v: &Vec3) -> Result<RegulationTriple, SolverError> {
    segment_path(model, FaceSet::EMPTY, w, v)
}

fn segment_path(model: &CostModel, k: FaceSet, w: &Vec3, v: &Vec3) -> Result<RegulationTriple, SolverError> {
    let op = model.one_piece_unchecked(k, &(v - w));
    if op.duration <= 0.0 {
        return Ok(RegulationTriple::empty(*w));
    }
    Ok(RegulationTriple::single(Segment::between(*w, *v, op.duration, op.ydot, model.data().r())?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    GradualOptimal,
    SpiralOptimal,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisReflectivity {
    pub axis: Vec<usize>,
    pub target: [f64; 3],
    pub check: Reflectivity,
}

/// Costs compared when deciding between the axis path and a spiral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub axis_cost: f64,
    /// `Ĩ²_{{2,3},2}(e3)` and its axis point.
    pub via_f2: f64,
    pub via_f2_point: [f64; 3],
    /// `Ĩ²_{{1,3},1}(e3)` and its axis point.
    pub via_f1: f64,
    pub via_f1_point: [f64; 3],
}

impl Witness {
    pub fn spiral_condition(&self, o: Orientation) -> bool {
        match o {
            Orientation::ViaF2 => self.axis_cost >= self.via_f2,
            Orientation::ViaF1 => self.axis_cost >= self.via_f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub params: RsParams,
    pub stability: StabilityReport,
    pub condition1: bool,
    pub reflectivity: Vec<AxisReflectivity>,
    pub axis_cost: f64,
    pub spiral: Option<SpiralSolution>,
    /// Outcome of the cost comparison alone.
    pub candidate: Verdict,
    /// `candidate` when Condition 1 holds, otherwise `Inconclusive`.
    pub verdict: Verdict,
    pub witness: Witness,
}

pub fn classify_optimal_path(params: &RsParams) -> Result<Classification, SolverError> {
    require_isotropic(params)?;
    let stability = classify_stability(params);
    if !stability.stable {
        return Err(SolverError::Unstable {
            theta0: params.theta0,
            r1: params.r1,
            r2: params.r2,
            report: Box::new(stability),
        });
    }
    let model = CostModel::new(&params.expand());
    classify_in(&model, params, stability)
}

fn classify_in(model: &CostModel, params: &RsParams, stability: StabilityReport) -> Result<Classification, SolverError> {
    let e3 = unit(2);
    let mut reflectivity = Vec::new();
    for m in 0..3 {
        let axis = FaceSet::from_indices(&[m]).complement();
        reflectivity.push(AxisReflectivity {
            axis: axis.labels(),
            target: unit(m).into(),
            check: model.reflectivity(axis, &unit(m))?,
        });
    }
    let axis_cost = model.one_piece(FaceSet::from_indices(&[0, 1]), &Vec3::zeros(), &e3)?.cost;
    let f2 = model.two_piece_via_axis(Orientation::ViaF2.prev_axis_faces(), 2, &e3)?;
    let f1 = model.two_piece_via_axis(Orientation::ViaF1.prev_axis_faces(), 1, &e3)?;
    let witness = Witness {
        axis_cost,
        via_f2: f2.value,
        via_f2_point: f2.via[0].into(),
        via_f1: f1.value,
        via_f1_point: f1.via[0].into(),
    };
    let mut spiral: Option<SpiralSolution> = None;
    for o in Orientation::ALL {
        if !witness.spiral_condition(o) {
            continue;
        }
        match spiral_in(model, o) {
            Ok(s) => {
                if spiral.as_ref().is_none_or(|b| s.total_cost < b.total_cost) {
                    spiral = Some(s);
                }
            }
            Err(SolverError::SpiralDegenerates(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let candidate = match &spiral {
        Some(s) if s.total_cost < axis_cost => Verdict::SpiralOptimal,
        _ => Verdict::GradualOptimal,
    };
    let condition1 = condition1(params.r1, params.r2);
    Ok(Classification {
        params: *params,
        stability,
        condition1,
        reflectivity,
        axis_cost,
        spiral,
        candidate,
        verdict: if condition1 { candidate } else { Verdict::Inconclusive },
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SearchMode {
    /// Finite gradual paths only.
    Gradual,
    /// Axis arrivals may use the classic spiral.
    SpiralAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathFamily {
    Origin,
    /// One piece, possibly reflected, on the smallest face set holding the target.
    OnePiece,
    /// Classic spiral to an axis point.
    Spiral,
    /// Axis then face (target on a face).
    AxisFace,
    /// Axis then interior.
    AxisDirect,
    /// Face then interior.
    FaceDirect,
    /// Axis, face, then interior.
    AxisFaceDirect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestPath {
    pub value: f64,
    pub path: RegulationTriple,
    pub family: PathFamily,
    pub uses_spiral: bool,
    /// Condition 1 fails, so optimality of the families searched is not
    /// guaranteed.
    pub inconclusive: bool,
}

pub fn best_cost_to_point(params: &RsParams, v: &Vec3) -> Result<BestPath, SolverError> {
    best_cost_to_point_with(params, v, SearchMode::SpiralAware)
}

struct AxisPrefix<'a> {
    model: &'a CostModel,
    unit_cost: f64,
    spiral: Option<&'a SpiralSolution>,
}

impl AxisPrefix<'_> {
    fn cost(&self, t: f64) -> f64 {
        t * self.unit_cost
    }

    /// Path from the origin to `t·e_m`.
    fn path(&self, m: usize, t: f64) -> Result<RegulationTriple, SolverError> {
        if t <= 0.0 {
            return Ok(RegulationTriple::empty(Vec3::zeros()));
        }
        match self.spiral {
            Some(s) => Ok(scale_path(&rotate_path(&s.truncated_path, (5 - m) % 3), t)?),
            None => segment_path(self.model, FaceSet::from_indices(&[m]).complement(), &Vec3::zeros(), &(unit(m) * t)),
        }
    }
}

pub fn best_cost_to_point_with(params: &RsParams, v: &Vec3, mode: SearchMode) -> Result<BestPath, SolverError> {
    if v.iter().any(|&x| !(x >= 0.0)) {
        return Err(SolverError::NotInOctant((*v).into()));
    }
    let class = classify_optimal_path(params)?;
    let model = CostModel::new(&params.expand());
    let spiral = match (mode, &class.spiral) {
        (SearchMode::SpiralAware, Some(s)) if s.total_cost < class.axis_cost => Some(s),
        _ => None,
    };
    let prefix = AxisPrefix {
        model: &model,
        unit_cost: spiral.map_or(class.axis_cost, |s| s.total_cost),
        spiral,
    };
    let mut best = search(&model, &prefix, v)?;
    best.inconclusive = !class.condition1;
    validate_triple(&best.path, model.data()).map_err(SolverError::InvalidPath)?;
    Ok(best)
}

fn search(model: &CostModel, prefix: &AxisPrefix, v: &Vec3) -> Result<BestPath, SolverError> {
    let on = FaceSet::of_point(v, 0.0);
    let spiral_used = prefix.spiral.is_some();
    match on.len() {
        3 => {
            return Ok(BestPath {
                value: 0.0,
                path: RegulationTriple::empty(Vec3::zeros()),
                family: PathFamily::Origin,
                uses_spiral: false,
                inconclusive: false,
            })
        }
        2 => {
            let m = on.complement().indices().next().unwrap();
            return Ok(BestPath {
                value: prefix.cost(v[m]),
                path: prefix.path(m, v[m])?,
                family: if spiral_used { PathFamily::Spiral } else { PathFamily::OnePiece },
                uses_spiral: spiral_used,
                inconclusive: false,
            });
        }
        _ => {}
    }
    let ext = extent(v);
    let mut cands: Vec<(f64, PathFamily, Vec<(FaceSet, Vec3)>, Option<(usize, f64)>)> = Vec::new();
    // Each candidate: value, family, list of (face set, end point) legs after the
    // optional axis prefix (axis index, length).
    if on.len() == 1 {
        let i = on.indices().next().unwrap();
        let fi = on;
        cands.push((model.one_piece_unchecked(fi, v).cost, PathFamily::OnePiece, vec![(fi, *v)], None));
        for m in (0..3).filter(|&m| m != i) {
            let (val, w) = min_over_axis(m, ext, |w| prefix.cost(w[m]) + model.one_piece_unchecked(fi, &(v - w)).cost);
            cands.push((val, PathFamily::AxisFace, vec![(fi, *v)], Some((m, w[m]))));
        }
    } else {
        cands.push((model.direct(&Vec3::zeros(), v), PathFamily::OnePiece, vec![(FaceSet::EMPTY, *v)], None));
        for m in 0..3 {
            let (val, w) = min_over_axis(m, ext, |w| prefix.cost(w[m]) + model.direct(w, v));
            cands.push((val, PathFamily::AxisDirect, vec![(FaceSet::EMPTY, *v)], Some((m, w[m]))));
        }
        for i in nearest_faces(v) {
            let fi = FaceSet::from_indices(&[i]);
            let face_cost = |w: &Vec3| face_arrival(model, prefix, i, w, ext);
            let (val, w) = min_over_face(i, ext, |w| face_cost(w).0 + model.direct(w, v));
            let (_, via) = face_cost(&w);
            match via {
                None => cands.push((val, PathFamily::FaceDirect, vec![(fi, w), (FaceSet::EMPTY, *v)], None)),
                Some((m, t)) => cands.push((
                    val,
                    PathFamily::AxisFaceDirect,
                    vec![(fi, w), (FaceSet::EMPTY, *v)],
                    Some((m, t)),
                )),
            }
        }
    }
    let mut best_i = 0;
    for (n, c) in cands.iter().enumerate() {
        if c.0 < cands[best_i].0 {
            best_i = n;
        }
    }
    let (value, family, legs, pre) = cands.swap_remove(best_i);
    let mut path = match pre {
        Some((m, t)) => prefix.path(m, t)?,
        None => RegulationTriple::empty(Vec3::zeros()),
    };
    for (k, end) in legs {
        let start = path.endpoint();
        let start = snap(&start, k);
        path = merge_paths(&path, &segment_path(model, k, &start, &end)?)?;
    }
    let uses_spiral = spiral_used && pre.is_some_and(|(_, t)| t > 0.0);
    Ok(BestPath { value, path, family, uses_spiral, inconclusive: false })
}

/// Zeroes coordinates of `p` in `k` (removes rounding residue from scaled
/// prefixes so pushing legs start exactly on their faces).
fn snap(p: &Vec3, k: FaceSet) -> Vec3 {
    let mut q = *p;
    for j in k.indices() {
        q[j] = 0.0;
    }
    q
}

/// Best cost of reaching `w ∈ F_i` directly on the face or via one of its
/// two axes; the axis and length used, if any.
fn face_arrival(model: &CostModel, prefix: &AxisPrefix, i: usize, w: &Vec3, ext: f64) -> (f64, Option<(usize, f64)>) {
    let fi = FaceSet::from_indices(&[i]);
    let mut best = (model.one_piece_unchecked(fi, w).cost, None);
    for m in (0..3).filter(|&m| m != i) {
        let (val, a) = min_over_axis(m, ext, |a| prefix.cost(a[m]) + model.one_piece_unchecked(fi, &(w - a)).cost);
        if val < best.0 {
            best = (val, Some((m, a[m])));
        }
    }
    best
}

/// The two faces closest to `v` (smallest coordinates; ties to the lower
/// index). Final direct segments never need to start in the interior of
/// the third.
pub fn nearest_faces(v: &Vec3) -> [usize; 2] {
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut out = [idx[0], idx[1]];
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> RsParams {
        RsParams::unit(-1.0, 1.5, 0.0).unwrap()
    }

    #[test]
    fn condition1_examples() {
        assert!(condition1(1.5, 0.0));
        assert!(condition1(1.9, 0.05));
        assert!((condition1_margin(1.9, 0.05) - (19.986 - 0.04634)).abs() < 1e-2);
        assert!(!condition1(0.0, 0.0));
        assert!(!condition1(0.5, 1.0));
        assert!(!condition1(1.5, 0.6));
    }

    #[test]
    fn spiral_minimizer_exact() {
        // f'(k)=0 reduces to 559k² − 1456k + 676 = 0, root 26/43, f = 4/17.
        let s = optimize_spiral(&example(), Orientation::ViaF2).unwrap();
        assert!((s.k_star - 26.0 / 43.0).abs() < 1e-7, "{}", s.k_star);
        assert!((s.total_cost - 4.0 / 17.0).abs() < 1e-12);
        assert!((s.truncated_cost - s.total_cost).abs() < s.tail_bound);
    }

    #[test]
    fn spiral_first_order_condition() {
        let p = example();
        let s = optimize_spiral(&p, Orientation::ViaF2).unwrap();
        let h = 1e-6;
        let fd = (spiral_cost(&p, Orientation::ViaF2, s.k_star + h).unwrap()
            - spiral_cost(&p, Orientation::ViaF2, s.k_star - h).unwrap())
            / (2.0 * h);
        assert!(fd.abs() < 1e-4);
    }

    #[test]
    fn classify_example_spiral() {
        let c = classify_optimal_path(&example()).unwrap();
        assert_eq!(c.verdict, Verdict::SpiralOptimal);
        assert!((c.axis_cost - 8.0 / 19.0).abs() < 1e-12);
        assert!(c.witness.via_f2 < 0.3317);
        let s = c.spiral.unwrap();
        assert_eq!(s.orientation, Orientation::ViaF2);
        assert!(s.total_cost < c.axis_cost);
    }

    #[test]
    fn classify_identity_reflection() {
        let c = classify_optimal_path(&RsParams::unit(-1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(c.candidate, Verdict::GradualOptimal);
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(!c.witness.spiral_condition(Orientation::ViaF2));
        assert!(!c.witness.spiral_condition(Orientation::ViaF1));
    }

    #[test]
    fn classify_unstable() {
        let e = classify_optimal_path(&RsParams::unit(-1.0, 2.5, 0.0).unwrap()).unwrap_err();
        assert!(matches!(e, SolverError::Unstable { .. }));
    }

    #[test]
    fn classify_rejects_correlation() {
        let p = RsParams::new(-1.0, 1.5, 0.0, 1.0, 0.2).unwrap();
        assert!(matches!(classify_optimal_path(&p), Err(SolverError::NonIsotropic(_))));
    }

    #[test]
    fn best_cost_identity_axis() {
        let b = best_cost_to_point(&RsParams::unit(-1.0, 0.0, 0.0).unwrap(), &unit(2)).unwrap();
        assert!((b.value - 2.0).abs() < 1e-12);
        assert!(b.inconclusive);
        assert!((path_cost(&b.path, &RsParams::unit(-1.0, 0.0, 0.0).unwrap().expand()).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn best_cost_example_axis_is_spiral() {
        let p = example();
        let b = best_cost_to_point(&p, &unit(2)).unwrap();
        assert!((b.value - 4.0 / 17.0).abs() < 1e-9);
        assert!(b.uses_spiral);
        assert!((path_cost(&b.path, &p.expand()).unwrap() - b.value).abs() < 1e-8);
    }

    #[test]
    fn best_cost_interior_is_consistent() {
        let p = example();
        let v = Vec3::new(1.0, 1.0, 1.0);
        let b = best_cost_to_point(&p, &v).unwrap();
        let g = best_cost_to_point_with(&p, &v, SearchMode::Gradual).unwrap();
        assert!(b.value <= g.value + 1e-12);
        assert!(b.value <= crate::costs::direct_cost(&Vec3::zeros(), &v, &p.expand()) + 1e-12);
        assert!((path_cost(&b.path, &p.expand()).unwrap() - b.value).abs() < 1e-7);
        assert!((b.path.endpoint() - v).amax() < 1e-9);
    }

    #[test]
    fn nearest_faces_ties() {
        assert_eq!(nearest_faces(&Vec3::new(3.0, 1.0, 2.0)), [1, 2]);
        assert_eq!(nearest_faces(&Vec3::new(1.0, 1.0, 1.0)), [0, 1]);
    }
}
