//! Brute-force one-piece cost: minimize `½‖d − θT − R_K s‖²_Γ / T` over
//! `T > 0` and `s ≥ 0` (`s = T·ẏ`). The inner problem is solved exactly by
//! enumerating active sets; the outer one by a log-scale scan and golden
//! section. Uses no projection formulas, so it checks them independently.

use super::OracleError;
use crate::geometry::{FaceSet, ProblemData, Vec3};
use crate::minimize::scan_golden;

// The objective is convex in T, so a coarse scan brackets its minimum.
const LOG_SPAN: f64 = 18.0;
const LOG_SCAN: usize = 33;
const LOG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentOptimum {
    pub cost: f64,
    pub duration: f64,
    pub ydot: Vec3,
}

/// Minimum of `‖e − R_K s‖²_Γ` over `s ≥ 0`, with the minimizer.
fn nnls(data: &ProblemData, k: FaceSet, e: &Vec3) -> (f64, Vec3) {
    let gi = data.gamma_inv();
    let ge = gi * e;
    let mut best = (e.dot(&ge), Vec3::zeros());
    let mut consider = |q: f64, s: Vec3| {
        if q < best.0 {
            best = (q, s);
        }
    };
    let idx: Vec<usize> = k.indices().collect();
    let col = |c: usize| data.r().column(c).into_owned();
    for &c in &idx {
        let a = col(c);
        let ga = gi * a;
        let g = a.dot(&ga);
        let s = a.dot(&ge) / g;
        if s >= 0.0 {
            let res = e - a * s;
            let mut full = Vec3::zeros();
            full[c] = s;
            consider(res.dot(&(gi * res)), full);
        }
    }
    if idx.len() == 2 {
        let (a, b) = (col(idx[0]), col(idx[1]));
        let (ga, gb) = (gi * a, gi * b);
        let (g11, g12, g22) = (a.dot(&ga), a.dot(&gb), b.dot(&gb));
        let (h1, h2) = (a.dot(&ge), b.dot(&ge));
        let det = g11 * g22 - g12 * g12;
        if det.abs() > 1e-14 * g11 * g22 {
            let s1 = (g22 * h1 - g12 * h2) / det;
            let s2 = (g11 * h2 - g12 * h1) / det;
            if s1 >= 0.0 && s2 >= 0.0 {
                let res = e - a * s1 - b * s2;
                let mut full = Vec3::zeros();
                full[idx[0]] = s1;
                full[idx[1]] = s2;
                consider(res.dot(&(gi * res)), full);
            }
        }
    }
    best
}

pub fn segment_cost_oracle(w: &Vec3, v: &Vec3, k: FaceSet, data: &ProblemData) -> Result<SegmentOptimum, OracleError> {
    if k.len() > 2 {
        return Err(OracleError::BadFaceSet(k));
    }
    for (name, p) in [("start", w), ("end", v)] {
        if p.iter().any(|&x| !(x >= -1e-12)) || k.indices().any(|j| p[j].abs() > 1e-12) {
            return Err(OracleError::NotOnFaces { which: name, point: (*p).into(), faces: k });
        }
    }
    let th = data.theta();
    let tn = data.norm(th);
    if tn == 0.0 {
        return Err(OracleError::ZeroDrift);
    }
    let mut d = v - w;
    for j in k.indices() {
        d[j] = 0.0;
    }
    if d.amax() == 0.0 {
        return Ok(SegmentOptimum { cost: 0.0, duration: 0.0, ydot: Vec3::zeros() });
    }
    let t0 = (data.norm(&d) / tn).ln();
    let g = |tau: f64| {
        let t = tau.exp();
        0.5 * nnls(data, k, &(d - th * t)).0 / t
    };
    let m = scan_golden(g, t0 - LOG_SPAN, t0 + LOG_SPAN, LOG_SCAN, LOG_TOL);
    let t = m.x.exp();
    let (q, s) = nnls(data, k, &(d - th * t));
    Ok(SegmentOptimum { cost: 0.5 * q / t, duration: t, ydot: s / t })
}
