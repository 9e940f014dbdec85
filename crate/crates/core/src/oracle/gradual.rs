//! Exhaustive search over finite gradual paths: direct, axis then direct,
//! face then direct, axis then face then direct, and the face and axis
//! variants ending on the boundary. Every leg is costed by the brute-force
//! segment minimizer.
//!
//! Face arrival costs are tabulated once on a normalized grid and rescaled
//! per target, since all path costs are positively homogeneous.

use super::segment::segment_cost_oracle;
use super::{OracleConfig, OracleError};
use crate::geometry::{unit, FaceSet, ProblemData, Vec3};
use crate::minimize::{grid_compass, scan_golden, Min2};

/// Face coordinates span `[0, FACE_BOX]` in units of the target's largest
/// coordinate; axis lengths span twice that.
const FACE_BOX: f64 = 2.0;
const REFINE_TOL: f64 = 1e-6;

pub struct GradualOracle {
    data: ProblemData,
    n: usize,
    /// Cost of the best one-piece path from the origin to `e_m`.
    axis_unit: [f64; 3],
    /// `tables[i][a * n + b]`: best arrival cost at grid point `(a, b)` of face `i`.
    tables: [Vec<f64>; 3],
}

fn seg(data: &ProblemData, k: FaceSet, w: &Vec3, v: &Vec3) -> f64 {
    let mut w = *w;
    let mut v = *v;
    for j in k.indices() {
        w[j] = 0.0;
        v[j] = 0.0;
    }
    segment_cost_oracle(&w, &v, k, data).map_or(f64::INFINITY, |s| s.cost)
}

fn face_point(i: usize, x: [f64; 2]) -> Vec3 {
    let (p, q) = (((i + 1) % 3).min((i + 2) % 3), ((i + 1) % 3).max((i + 2) % 3));
    let mut w = Vec3::zeros();
    w[p] = x[0];
    w[q] = x[1];
    w
}

impl GradualOracle {
    pub fn new(data: &ProblemData, cfg: &OracleConfig) -> Result<Self, OracleError> {
        if cfg.grid_resolution < 8 {
            return Err(OracleError::BadGrid);
        }
        if data.norm(data.theta()) == 0.0 {
            return Err(OracleError::ZeroDrift);
        }
        let n = cfg.grid_resolution;
        let mut axis_unit = [0.0; 3];
        for (m, a) in axis_unit.iter_mut().enumerate() {
            let k = FaceSet::from_indices(&[m]).complement();
            *a = seg(data, k, &Vec3::zeros(), &unit(m));
        }
        let mut me = Self { data: data.clone(), n, axis_unit, tables: [Vec::new(), Vec::new(), Vec::new()] };
        let h = FACE_BOX / (n - 1) as f64;
        for i in 0..3 {
            let mut t = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    t.push(me.face_arrival(i, &face_point(i, [a as f64 * h, b as f64 * h]), 1.0));
                }
            }
            me.tables[i] = t;
        }
        Ok(me)
    }

    /// Best gradual cost of reaching `w ∈ F_i`: on the face alone, or via
    /// one of its axes. `scale` sizes the axis search.
    fn face_arrival(&self, i: usize, w: &Vec3, scale: f64) -> f64 {
        let fi = FaceSet::from_indices(&[i]);
        let mut best = seg(&self.data, fi, &Vec3::zeros(), w);
        for m in (0..3).filter(|&m| m != i) {
            let r = self.axis_then(m, fi, w, scale);
            best = best.min(r);
        }
        best
    }

    /// `min_t t·axis_unit[m] + Ĩ_K(t·e_m, v)`.
    fn axis_then(&self, m: usize, k: FaceSet, v: &Vec3, scale: f64) -> f64 {
        let hi = 2.0 * FACE_BOX * scale;
        let e = unit(m);
        scan_golden(
            |t| t * self.axis_unit[m] + seg(&self.data, k, &(e * t), v),
            0.0,
            hi,
            self.n,
            REFINE_TOL * hi,
        )
        .fx
    }

    /// Least cost over the gradual families.
    pub fn value(&self, v: &Vec3) -> Result<f64, OracleError> {
        if v.iter().any(|&x| !(x >= 0.0)) {
            return Err(OracleError::NotOnFaces { which: "target", point: (*v).into(), faces: FaceSet::EMPTY });
        }
        let on = FaceSet::of_point(v, 0.0);
        let s = v.amax();
        let data = &self.data;
        match on.len() {
            3 => Ok(0.0),
            2 => {
                let m = on.complement().indices().next().unwrap();
                Ok(v[m] * self.axis_unit[m])
            }
            1 => {
                let i = on.indices().next().unwrap();
                Ok(self.face_arrival(i, v, s))
            }
            _ => {
                let mut best = seg(data, FaceSet::EMPTY, &Vec3::zeros(), v);
                for m in 0..3 {
                    best = best.min(self.axis_then(m, FaceSet::EMPTY, v, s));
                }
                let n = self.n;
                let h = FACE_BOX / (n - 1) as f64;
                let mut face_best: Option<(usize, Min2)> = None;
                for i in 0..3 {
                    for a in 0..n {
                        for b in 0..n {
                            let x = [a as f64 * h * s, b as f64 * h * s];
                            let w = face_point(i, x);
                            let c = s * self.tables[i][a * n + b] + seg(data, FaceSet::EMPTY, &w, v);
                            if face_best.is_none_or(|(_, m)| c < m.fx) {
                                face_best = Some((i, Min2 { x, fx: c }));
                            }
                        }
                    }
                }
                if let Some((i, start)) = face_best {
                    best = best.min(start.fx);
                    let lo = [(start.x[0] - h * s).max(0.0), (start.x[1] - h * s).max(0.0)];
                    let hi = [start.x[0] + h * s, start.x[1] + h * s];
                    let refined = grid_compass(
                        |x| {
                            let w = face_point(i, x);
                            self.face_arrival(i, &w, s) + seg(data, FaceSet::EMPTY, &w, v)
                        },
                        lo,
                        hi,
                        3,
                        1,
                        REFINE_TOL * s,
                    );
                    best = best.min(refined.fx);
                }
                Ok(best)
            }
        }
    }
}

/// Least gradual cost to `v`; an upper bound on the true optimum.
pub fn enumerate_gradual(v: &Vec3, data: &ProblemData, cfg: &OracleConfig) -> Result<f64, OracleError> {
    GradualOracle::new(data, cfg)?.value(v)
}
