//! Seeded property checks of the path comparison inequalities. Every check
//! draws its data inside the hypotheses of the inequality it tests, except
//! the adversarial one, which exists to show the checks can fail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::segment::segment_cost_oracle;
use super::{CheckReport, Condition1Survey, OracleConfig, OracleError, OracleReport, ViolationRecord, MAX_RECORDS};
use crate::costs::CostModel;
use crate::geometry::{rotate, rs_gamma_inverse, rs_r_inverse, unit, FaceSet, ProblemData, RsParams, Vec3};
use crate::paths::{path_cost, RegulationTriple, Segment};
use crate::solver::{condition1, condition1_margin};

type Values = Vec<(&'static str, f64)>;
/// `Err` carries the reproduction data of a violating sample.
type Outcome = Result<(), Values>;

struct Check {
    name: &'static str,
    expect_violations: bool,
    run: fn(&mut ChaCha8Rng, f64) -> Outcome,
}

const CHECKS: &[Check] = &[
    Check { name: "switchback", expect_violations: false, run: switchback },
    Check { name: "axis_eliminate", expect_violations: false, run: axis_eliminate },
    Check { name: "different_r", expect_violations: false, run: different_r },
    Check { name: "case3_monotone", expect_violations: false, run: case3_monotone },
    Check { name: "dfo_case1", expect_violations: false, run: dfo_case1 },
    Check { name: "dfo_case2", expect_violations: false, run: dfo_case2 },
    Check { name: "dfo_case3", expect_violations: false, run: dfo_case3 },
    Check { name: "exotic_spiral", expect_violations: false, run: exotic_spiral },
    Check { name: "reflected_convexity", expect_violations: false, run: reflected_convexity },
    Check { name: "bad_faces", expect_violations: false, run: bad_faces },
    Check { name: "bad_faces_mirror", expect_violations: false, run: bad_faces_mirror },
    Check { name: "gamma_order", expect_violations: false, run: gamma_order },
    Check { name: "r_inverse", expect_violations: false, run: r_inverse },
    Check { name: "homogeneity", expect_violations: false, run: homogeneity },
    Check { name: "rotation_invariance", expect_violations: false, run: rotation_invariance },
];

const ADVERSARIAL: Check = Check { name: "different_r_adversarial", expect_violations: true, run: different_r_swapped };

/// Strict inequalities must hold by this much, relative to the instance.
const STRICT: f64 = 1e-12;

fn sample_seed(seed: u64, check: usize, sample: usize) -> u64 {
    let mut z = seed ^ (check as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add((sample as u64).wrapping_mul(0xBF58_4761_CE4E_5B9D));
    z ^= z >> 31;
    z
}

fn run_check(c: &Check, idx: usize, cfg: &OracleConfig) -> CheckReport {
    let bad: Vec<(usize, Values)> = (0..cfg.samples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(cfg.seed, idx, i));
            (c.run)(&mut rng, cfg.tolerance).err().map(|v| (i, v))
        })
        .collect();
    CheckReport {
        name: c.name.to_string(),
        samples: cfg.samples,
        violations: bad.len(),
        expect_violations: c.expect_violations,
        records: bad
            .into_iter()
            .take(MAX_RECORDS)
            .map(|(sample, v)| ViolationRecord {
                sample,
                values: v.into_iter().map(|(k, x)| (k.to_string(), x)).collect(),
            })
            .collect(),
    }
}

/// Runs every check `cfg.samples` times. Deterministic in `cfg.seed`
/// regardless of thread count.
pub fn lemma_suite(cfg: &OracleConfig) -> Result<OracleReport, OracleError> {
    if cfg.samples == 0 {
        return Err(OracleError::NoSamples);
    }
    let mut checks: Vec<CheckReport> = CHECKS.iter().enumerate().map(|(i, c)| run_check(c, i, cfg)).collect();
    if cfg.adversarial {
        checks.push(run_check(&ADVERSARIAL, CHECKS.len(), cfg));
    }
    Ok(OracleReport {
        seed: cfg.seed,
        samples: cfg.samples,
        adversarial: cfg.adversarial,
        checks,
        condition1_survey: condition1_survey(SURVEY_GRID),
    })
}

const SURVEY_GRID: usize = 201;

/// Evaluates Condition 1 on an `n × n` grid over `[0, 2]²`, keeping the
/// stable cells off the diagonal.
pub fn condition1_survey(n: usize) -> Condition1Survey {
    let n = n.max(2);
    let mut out = Condition1Survey { grid: n, cells: 0, holds: 0, min_margin: f64::INFINITY, min_margin_at: [f64::NAN; 2] };
    for i in 0..n {
        for j in 0..n {
            let a = 2.0 * i as f64 / (n - 1) as f64;
            let b = 2.0 * j as f64 / (n - 1) as f64;
            if a == b || a + b >= 2.0 {
                continue;
            }
            let (r1, r2) = (a.max(b), a.min(b));
            out.cells += 1;
            if condition1(r1, r2) {
                out.holds += 1;
            }
            let m = condition1_margin(r1, r2);
            if m < out.min_margin {
                out.min_margin = m;
                out.min_margin_at = [r1, r2];
            }
        }
    }
    out
}

// Sampling helpers.

fn drift(rng: &mut ChaCha8Rng) -> f64 {
    -rng.gen_range(0.1..2.0)
}

/// Strictly positive coordinate in `(0, 2)`.
fn pos(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(1e-3..2.0)
}

fn covariance(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.gen_range(0.5..2.0), rng.gen_range(-0.45..0.9))
}

fn fail(mut v: Values, p: &RsParams) -> Outcome {
    v.extend([("theta0", p.theta0), ("r1", p.r1), ("r2", p.r2), ("sigma2", p.sigma2), ("rho", p.rho)]);
    Err(v)
}

fn strictly_less(lo: f64, hi: f64) -> bool {
    hi - lo >= STRICT * (1.0 + lo.abs() + hi.abs())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn face(i: usize) -> FaceSet {
    FaceSet::from_indices(&[i])
}

fn direct_segment(a: Vec3, b: Vec3, data: &ProblemData) -> Option<Segment> {
    let t = data.norm(&(b - a)) / data.norm(data.theta());
    Segment::between(a, b, t, Vec3::zeros(), data.r()).ok()
}

/// Optimal one-piece segment from `a` to `b` on `F_K`.
fn optimal_segment(m: &CostModel, k: FaceSet, a: Vec3, b: Vec3) -> Option<(Segment, f64)> {
    let op = m.one_piece(k, &a, &b).ok()?;
    let s = Segment::between(a, b, op.duration, op.ydot, m.data().r()).ok()?;
    Some((s, op.cost))
}

fn triple(segments: Vec<Segment>) -> RegulationTriple {
    RegulationTriple { origin: segments[0].z_start, segments }
}

// Checks.

fn switchback(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let p = RsParams::unit(drift(rng), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)).unwrap();
    let data = p.expand();
    let m = CostModel::new(&data);
    let v1 = Vec3::new(0.0, pos(rng), pos(rng));
    let v2 = Vec3::new(pos(rng), 0.0, pos(rng));
    let v3 = Vec3::new(pos(rng), 0.0, pos(rng));
    let v4 = Vec3::new(0.0, pos(rng), pos(rng));
    let (t2, t3) = if v2[0] >= v3[0] {
        (Vec3::new(v2[0] - v3[0], 0.0, v2[2]), Vec3::new(0.0, 0.0, v3[2]))
    } else {
        (Vec3::new(0.0, 0.0, v2[2]), Vec3::new(v3[0] - v2[0], 0.0, v3[2]))
    };
    let pp = v1[1].powi(2) + (v2[2] - v1[2]).powi(2);
    let qq = v4[1].powi(2) + (v4[2] - v3[2]).powi(2);
    let old_len = (pp + v2[0].powi(2)).sqrt() + (qq + v3[0].powi(2)).sqrt();
    let new_len = (pp + t2[0].powi(2)).sqrt() + (qq + t3[0].powi(2)).sqrt();
    let root_ok = strictly_less(new_len, old_len);

    let f2 = face(1);
    let built = (|| {
        let (mid, mid_cost) = optimal_segment(&m, f2, v2, v3)?;
        let old = triple(vec![direct_segment(v1, v2, &data)?, mid, direct_segment(v3, v4, &data)?]);
        let moved = Segment { z_start: t2, ..mid };
        let new = triple(vec![direct_segment(v1, t2, &data)?, moved, direct_segment(t3, v4, &data)?]);
        let end_gap = (new.endpoint() - v4).amax();
        Some((path_cost(&old, &data).ok()?, path_cost(&new, &data).ok()?, mid_cost, mid.cost(&data), end_gap))
    })();
    match built {
        Some((old, new, c, c_seg, gap)) if root_ok && strictly_less(new, old) && close(c, c_seg, tol) && gap <= tol => {
            Ok(())
        }
        Some((old, new, ..)) => fail(vec![("old_cost", old), ("new_cost", new), ("old_len", old_len), ("new_len", new_len)], &p),
        None => fail(vec![("invalid_path", 1.0)], &p),
    }
}

fn axis_eliminate(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let p = RsParams::unit(drift(rng), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)).unwrap();
    let data = p.expand();
    let m = CostModel::new(&data);
    let e3 = unit(2);
    let v1 = Vec3::new(0.0, pos(rng), pos(rng));
    let v2 = Vec3::new(pos(rng), 0.0, pos(rng));
    let t2 = Vec3::new(0.0, 0.0, v2[2]);
    let f2 = face(1);
    let built = (|| {
        let (refl, _) = optimal_segment(&m, f2, v2, e3)?;
        let dir = direct_segment(v1, v2, &data)?;
        let old = triple(vec![dir, refl]);
        let y = refl.ydot[1];
        let x = refl.xdot;
        let refl_mod = Segment::new(t2, refl.duration, Vec3::new(-p.r2 * y, -y, x[2]), refl.ydot, data.r()).ok()?;
        let dir_mod = Segment::new(v1, dir.duration, Vec3::new(0.0, dir.xdot[1], dir.xdot[2]), Vec3::zeros(), data.r()).ok()?;
        let new = triple(vec![dir_mod, refl_mod]);
        let gap = (new.endpoint() - e3).amax().max((dir_mod.z_end() - t2).amax());
        let best_new = m.direct(&v1, &t2) + m.one_piece(f2, &t2, &e3).ok()?.cost;
        Some((path_cost(&old, &data).ok()?, path_cost(&new, &data).ok()?, best_new, refl.duration, dir.duration, y, gap))
    })();
    let Some((old, new, best_new, t1, tt2, y, gap)) = built else {
        return fail(vec![("invalid_path", 1.0)], &p);
    };
    let c = v2[0];
    let formula = 0.5 * (c * c / t1 + c * c / tt2 + 2.0 * p.r2 * c * y);
    if close(old - new, formula, tol) && formula > 0.0 && gap <= tol && strictly_less(best_new, old) {
        Ok(())
    } else {
        fail(vec![("old_cost", old), ("new_cost", new), ("formula", formula), ("best_new", best_new)], &p)
    }
}

/// Shared body of the differentR check; `swapped` samples `r1 < r2`.
fn different_r_body(rng: &mut ChaCha8Rng, tol: f64, swapped: bool) -> Outcome {
    let (s2, rho) = covariance(rng);
    let (hi, lo) = {
        let a: f64 = rng.gen_range(0.0..2.0);
        let b: f64 = rng.gen_range(0.0..2.0);
        (a.max(b), a.min(b))
    };
    let (r1, r2) = if swapped { (lo.min(hi - 0.2).max(0.0), hi.max(lo + 0.2)) } else { (hi, lo) };
    let p = RsParams::new(drift(rng), r1, r2, s2, rho).unwrap();
    let data = p.expand();
    let (a, b) = {
        let x: f64 = rng.gen_range(0.0..2.0);
        let y: f64 = rng.gen_range(0.0..2.0);
        if swapped {
            (x.min(y), x.max(y) + 0.1)
        } else {
            (x.min(y), x.max(y).max(1e-3))
        }
    };
    let v = Vec3::new(0.0, a, b);
    let vbar = Vec3::new(a, 0.0, b);
    let o = Vec3::zeros();
    let (Ok(opt), Ok(other)) = (segment_cost_oracle(&o, &v, face(0), &data), segment_cost_oracle(&o, &vbar, face(1), &data))
    else {
        return fail(vec![("oracle_error", 1.0)], &p);
    };
    let t = opt.duration;
    let y1 = opt.ydot[0];
    let r = data.r();
    let th = data.theta();
    let z = v / t;
    let zbar = vbar / t;
    let ybar = Vec3::new(0.0, y1, 0.0);
    let e = z - r * opt.ydot - th;
    let ebar = zbar - r * ybar - th;
    let gap = 0.5 * (data.inner(&e, &e) - data.inner(&ebar, &ebar)) * t;
    let g = rs_gamma_inverse(rho).unwrap();
    let formula = (r1 - r2) * (g.gamma0 - g.gamma1) * (zbar[2] - zbar[0]) * y1 * t / s2;
    let bar_valid = Segment::between(o, vbar, t, ybar, r)
        .ok()
        .is_some_and(|s| path_cost(&RegulationTriple::single(s), &data).is_ok());
    let scale = 1.0 + opt.cost.abs() + other.cost.abs();
    let ok = close(gap, formula, tol)
        && close(0.5 * data.inner(&e, &e) * t, opt.cost, tol)
        && formula >= -tol * scale
        && opt.cost >= other.cost - tol * scale
        && bar_valid;
    if ok {
        Ok(())
    } else {
        fail(
            vec![("a", a), ("b", b), ("cost_f1", opt.cost), ("cost_f2", other.cost), ("gap", gap), ("formula", formula)],
            &p,
        )
    }
}

fn different_r(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    different_r_body(rng, tol, false)
}

fn different_r_swapped(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    different_r_body(rng, tol, true)
}

/// `(r1, r2)` uniform on the part of `r1 > r2 ≥ 0`, `r1 + r2 < 2` where
/// Condition 1 holds.
fn condition1_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    loop {
        let r1 = rng.gen_range(0.0..2.0);
        let r2 = rng.gen_range(0.0..2.0);
        if condition1(r1, r2) {
            return (r1, r2);
        }
    }
}

fn case3_monotone(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let (r1, r2) = condition1_pair(rng);
    let th0 = drift(rng);
    let p = RsParams::unit(th0, r1, r2).unwrap();
    let m = CostModel::new(&p.expand());
    let f2 = face(1);
    let o = Vec3::zeros();
    let g = |x: f64| m.reflected(f2, &o, &Vec3::new(x, 0.0, 1.0)).map(|c| c.value).unwrap_or(f64::NAN);
    let v1 = rng.gen_range(1e-3..1.0);
    let (g0, gv) = (g(0.0), g(v1));
    let h = 1e-6;
    let fd = (g(h) - g0) / h;
    let Ok(pr) = m.projection(f2) else {
        return fail(vec![("projection_error", 1.0)], &p);
    };
    let a = pr.a;
    let at = a * p.drift();
    let ratio = at.norm() / (a * unit(2)).norm();
    let analytic = 0.5 * ratio * (a[(2, 0)] + a[(0, 2)]) - at[0];
    let q = 1.0 + r1 * r1 + r2 * r2 - r1 - r2 - r1 * r2;
    let ratio2 = 2.0 * q * th0 * th0 / (1.0 + r2 * r2);
    let at1 = (1.0 + r1 * r1 - r2 - r1 * r2) * th0 / (1.0 + r1 * r1 + r2 * r2);
    let ok = strictly_less(g0, gv)
        && analytic >= -tol
        && (fd - analytic).abs() <= 1e-5 * (1.0 + analytic.abs())
        && close(ratio * ratio, ratio2, tol)
        && close(at[0], at1, tol);
    if ok {
        Ok(())
    } else {
        fail(vec![("v1", v1), ("g0", g0), ("g_v1", gv), ("fd", fd), ("analytic", analytic)], &p)
    }
}

/// Terminal points shared by the three DFO cases: `v' = (0, v2, v3)` with
/// `v2 < v3`.
fn dfo_target(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let (a, b) = (pos(rng), pos(rng));
        if a < b {
            return Vec3::new(0.0, a, b);
        }
    }
}

/// Best two-piece cost to `vp` through `w ∈ F_face`.
fn through(m: &CostModel, face_idx: usize, w: &Vec3, vp: &Vec3) -> Option<(f64, f64)> {
    let first = m.one_piece(face(face_idx), &Vec3::zeros(), w).ok()?.cost;
    Some((first, m.direct(w, vp)))
}

fn dfo_case1(rng: &mut ChaCha8Rng, _tol: f64) -> Outcome {
    let a: f64 = rng.gen_range(0.0..2.0);
    let b: f64 = rng.gen_range(0.0..2.0);
    let p = RsParams::unit(drift(rng), a.min(b), a.max(b)).unwrap();
    let m = CostModel::new(&p.expand());
    let v1 = rng.gen_range(1e-3..1.0);
    let vp = dfo_target(rng);
    let v = Vec3::new(v1, 0.0, 1.0);
    let vhat = Vec3::new(0.0, v1, 1.0);
    match (through(&m, 1, &v, &vp), through(&m, 0, &vhat, &vp)) {
        (Some((a1, a2)), Some((b1, b2))) if strictly_less(b1 + b2, a1 + a2) => Ok(()),
        (Some((a1, a2)), Some((b1, b2))) => fail(vec![("v1", v1), ("v2", vp[1]), ("v3", vp[2]), ("old", a1 + a2), ("new", b1 + b2)], &p),
        _ => fail(vec![("cost_error", 1.0)], &p),
    }
}

fn dfo_case2(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let p = RsParams::unit(drift(rng), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)).unwrap();
    let m = CostModel::new(&p.expand());
    let v1 = rng.gen_range(1.0..2.0);
    let vp = dfo_target(rng);
    let v = Vec3::new(v1, 0.0, 1.0);
    let vt = Vec3::new(0.0, 1.0, v1);
    match (through(&m, 1, &v, &vp), through(&m, 0, &vt, &vp)) {
        (Some((a1, a2)), Some((b1, b2))) if close(a1, b1, tol) && strictly_less(b2, a2) => Ok(()),
        (Some((a1, a2)), Some((b1, b2))) => {
            fail(vec![("v1", v1), ("v2", vp[1]), ("v3", vp[2]), ("first_old", a1), ("first_new", b1), ("second_old", a2), ("second_new", b2)], &p)
        }
        _ => fail(vec![("cost_error", 1.0)], &p),
    }
}

const DFO_K_GRID: usize = 32;

fn dfo_case3(rng: &mut ChaCha8Rng, _tol: f64) -> Outcome {
    let (r1, r2) = condition1_pair(rng);
    let p = RsParams::unit(drift(rng), r1, r2).unwrap();
    let m = CostModel::new(&p.expand());
    let v1 = rng.gen_range(1e-3..1.0);
    let vp = dfo_target(rng);
    let v = Vec3::new(v1, 0.0, 1.0);
    let Some((a1, a2)) = through(&m, 1, &v, &vp) else {
        return fail(vec![("cost_error", 1.0)], &p);
    };
    let via = |k: f64| {
        let w = unit(2) * k;
        let first = m.one_piece(face(1), &Vec3::zeros(), &w).map(|c| c.cost);
        let second = m.one_piece(face(0), &w, &vp).map(|c| c.cost);
        match (first, second) {
            (Ok(x), Ok(y)) => x + y,
            _ => f64::INFINITY,
        }
    };
    let ks = (0..=DFO_K_GRID).map(|i| i as f64 / DFO_K_GRID as f64).chain([1.0 - r2 * v1]);
    let (best_k, best) = ks.map(|k| (k, via(k))).fold((f64::NAN, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
    if strictly_less(best, a1 + a2) {
        Ok(())
    } else {
        fail(vec![("v1", v1), ("v2", vp[1]), ("v3", vp[2]), ("old", a1 + a2), ("new", best), ("k", best_k)], &p)
    }
}

fn exotic_spiral(rng: &mut ChaCha8Rng, _tol: f64) -> Outcome {
    let (s2, rho) = covariance(rng);
    let p = RsParams::new(drift(rng), 0.0, 0.0, s2, rho).unwrap();
    let m = CostModel::new(&p.expand());
    let (v1, v3, u1, u2) = (pos(rng), pos(rng), pos(rng), pos(rng));
    let k = rng.gen_range(0.01..0.99);
    let v = Vec3::new(v1, 0.0, v3);
    let u = Vec3::new(u1, u2, 0.0);
    let up = Vec3::new(0.0, k * u1, k * u2);
    let f = |x: f64| {
        let ux = Vec3::new(u1 - x, u2 - x, 0.0);
        let vpx = Vec3::new(k * v3 - x, k * v1 - x, 0.0);
        m.direct(&up, &vpx) + m.direct(&ux, &v)
    };
    let h = 1e-3 * u1.min(u2).min(k * v1).min(k * v3).max(1e-6);
    let fd = (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
    let g = rs_gamma_inverse(rho).unwrap();
    let data = m.data();
    let closed = -data.norm(data.theta()) / data.norm(&(v - u)) * (g.gamma0 - g.gamma1) * (u2 + v3) / s2;
    if closed < 0.0 && (fd - closed).abs() <= 1e-5 * closed.abs() {
        Ok(())
    } else {
        fail(vec![("v1", v1), ("v3", v3), ("u1", u1), ("u2", u2), ("k", k), ("fd", fd), ("closed", closed)], &p)
    }
}

fn face_point(rng: &mut ChaCha8Rng, j: usize) -> Vec3 {
    let mut w = Vec3::new(pos(rng), pos(rng), pos(rng));
    w[j] = 0.0;
    w
}

fn reflected_convexity(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let (s2, rho) = if rng.gen_bool(0.5) { (1.0, 0.0) } else { covariance(rng) };
    let p = RsParams::new(drift(rng), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), s2, rho).unwrap();
    let m = CostModel::new(&p.expand());
    let j = rng.gen_range(0..3);
    let (v1, v2, v3) = (face_point(rng, j), face_point(rng, j), face_point(rng, j));
    let k = face(j);
    let (Ok(joined), Ok(first)) = (m.one_piece(k, &v1, &v3), m.one_piece(k, &v1, &v2)) else {
        return fail(vec![("cost_error", 1.0)], &p);
    };
    let rhs = first.cost + m.direct(&v2, &v3);
    if joined.cost <= rhs + tol * (1.0 + rhs) {
        Ok(())
    } else {
        fail(vec![("face", j as f64 + 1.0), ("joined", joined.cost), ("two_piece", rhs)], &p)
    }
}

/// Sorted terminal point `0 < v1 ≤ v2 ≤ v3` and face coordinates `a, b`,
/// not both zero.
fn bad_face_sample(rng: &mut ChaCha8Rng) -> (RsParams, Vec3, f64, f64) {
    let (s2, rho) = covariance(rng);
    let p = RsParams::new(drift(rng), 0.0, 0.0, s2, rho).unwrap();
    let mut c = [pos(rng), pos(rng), pos(rng)];
    c.sort_by(f64::total_cmp);
    let a: f64 = rng.gen_range(0.0..2.0);
    let b = pos(rng);
    let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
    (p, Vec3::from(c), a, b)
}

fn bad_faces(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let (p, v, a, b) = bad_face_sample(rng);
    let m = CostModel::new(&p.expand());
    let near = m.direct(&Vec3::new(0.0, a, b), &v);
    let far = m.direct(&Vec3::new(a, b, 0.0), &v);
    if far >= near - tol * (1.0 + near) {
        Ok(())
    } else {
        fail(vec![("a", a), ("b", b), ("v1", v[0]), ("v2", v[1]), ("v3", v[2]), ("near", near), ("far", far)], &p)
    }
}

fn bad_faces_mirror(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let (p, v, a, b) = bad_face_sample(rng);
    let m = CostModel::new(&p.expand());
    let near = m.direct(&Vec3::new(0.0, b, a), &v);
    let far = m.direct(&Vec3::new(b, 0.0, a), &v);
    if far >= near - tol * (1.0 + near) {
        Ok(())
    } else {
        fail(vec![("a", a), ("b", b), ("v1", v[0]), ("v2", v[1]), ("v3", v[2]), ("near", near), ("far", far)], &p)
    }
}

fn gamma_order(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let rho = rng.gen_range(-0.4999..0.9999);
    let g = rs_gamma_inverse(rho).unwrap();
    if g.gamma0 > g.gamma1 && close(g.gamma0 + 2.0 * rho * g.gamma1, 1.0, tol) {
        Ok(())
    } else {
        Err(vec![("rho", rho), ("gamma0", g.gamma0), ("gamma1", g.gamma1)])
    }
}

fn r_inverse(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let p = RsParams::unit(-1.0, rng.gen_range(-1.0..3.0), rng.gen_range(-1.0..3.0)).unwrap();
    let Ok(inv) = rs_r_inverse(p.r1, p.r2) else {
        // Singular draws carry no inverse to check.
        return Ok(());
    };
    let prod = p.reflection_matrix() * inv.matrix();
    let err = (prod - crate::geometry::Mat3::identity()).amax();
    let sum = (inv.a + inv.b + inv.c) * (1.0 + p.r1 + p.r2);
    let scale = inv.matrix().amax().max(1.0);
    if err <= tol * scale * 10.0 && close(sum, 1.0, tol * scale) {
        Ok(())
    } else {
        fail(vec![("residual", err), ("row_sum_product", sum)], &p)
    }
}

/// Random RS data, a face set of size at most two and two points on it.
fn cost_instance(rng: &mut ChaCha8Rng) -> (RsParams, FaceSet, Vec3, Vec3) {
    let (s2, rho) = if rng.gen_bool(0.5) { (1.0, 0.0) } else { covariance(rng) };
    let p = RsParams::new(drift(rng), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), s2, rho).unwrap();
    let k = loop {
        let k = FaceSet::from_bits(rng.gen_range(0..8));
        if k.len() <= 2 {
            break k;
        }
    };
    let mut w = Vec3::new(pos(rng), pos(rng), pos(rng));
    let mut v = Vec3::new(pos(rng), pos(rng), pos(rng));
    for j in k.indices() {
        w[j] = 0.0;
        v[j] = 0.0;
    }
    (p, k, w, v)
}

fn homogeneity(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let (p, k, w, v) = cost_instance(rng);
    let c = rng.gen_range(0.1..10.0);
    let m = CostModel::new(&p.expand());
    match (m.one_piece(k, &w, &v), m.one_piece(k, &(w * c), &(v * c))) {
        (Ok(a), Ok(b)) if close(b.cost, c * a.cost, tol) => Ok(()),
        (Ok(a), Ok(b)) => fail(vec![("faces", k.bits() as f64), ("scale", c), ("cost", a.cost), ("scaled_cost", b.cost)], &p),
        _ => fail(vec![("cost_error", 1.0)], &p),
    }
}

fn rotation_invariance(rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let (p, k, w, v) = cost_instance(rng);
    let s = rng.gen_range(1..3);
    let m = CostModel::new(&p.expand());
    match (m.one_piece(k, &w, &v), m.one_piece(k.rotated(s), &rotate(&w, s), &rotate(&v, s))) {
        (Ok(a), Ok(b)) if close(a.cost, b.cost, tol) => Ok(()),
        (Ok(a), Ok(b)) => fail(vec![("faces", k.bits() as f64), ("shift", s as f64), ("cost", a.cost), ("rotated_cost", b.cost)], &p),
        _ => fail(vec![("cost_error", 1.0)], &p),
    }
}
