//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use octant_vp::costs::CostModel;
use octant_vp::geometry::{unit, FaceSet, RsParams, Vec3};
use octant_vp::oracle::{lemma_suite, segment_cost_oracle, GradualOracle, OracleConfig};
use octant_vp::paths::validate_triple;
use octant_vp::solver::{best_cost_to_point, build_spiral, classify_optimal_path};
use octant_vp::stability::{classify_stability, BOUNDARY_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Gate {
    failed: Vec<String>,
}

impl Gate {
    fn check(&mut self, id: &str, pass: bool, detail: impl AsRef<str>) {
        println!("{} {id}: {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn example() -> RsParams {
    RsParams::unit(-1.0, 1.5, 0.0).unwrap()
}

fn reproduction(g: &mut Gate) {
    let start = Instant::now();
    let p = example();
    let m = CostModel::new(&p.expand());
    let e3 = unit(2);
    let axis = FaceSet::of(&[1, 2]).unwrap();
    let axis_cost = m.reflected(axis, &Vec3::zeros(), &e3).unwrap().value;
    let u = unit(0) * 0.5;
    let witness = m.one_piece(FaceSet::of(&[2, 3]).unwrap(), &Vec3::zeros(), &u).unwrap().cost
        + m.one_piece(FaceSet::of(&[2]).unwrap(), &u, &e3).unwrap().cost;
    let refl = m.reflectivity(axis, &e3).unwrap().vector;
    let class = classify_optimal_path(&p).unwrap();
    let spiral = class.spiral.as_ref();
    let k_star = spiral.map_or(f64::NAN, |s| s.k_star);
    let total = spiral.map_or(f64::NAN, |s| s.total_cost);
    let elapsed = start.elapsed().as_secs_f64();

    let (a, b, c): (f64, f64, f64) = (1_228_123.0, -3_690_960.0, 1_626_300.0);
    let disc = (b * b - 4.0 * a * c).sqrt();
    let roots = [(-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a)];
    let root = roots.into_iter().filter(|r| *r > 0.0 && *r < 1.0).fold(f64::NAN, f64::max);

    let within = |x: f64, t: f64| (x - t).abs() <= 1e-3;
    g.check("1a axis cost", within(axis_cost, 0.4211), format!("{axis_cost:.6} vs 0.4211"));
    g.check("1b witness cost", within(witness, 0.3317), format!("{witness:.6} vs 0.3317"));
    g.check(
        "1c reflectivity vector",
        refl.len() == 2 && within(refl[0], 0.0526) && within(refl[1], 1.5526),
        format!("({:.6}, {:.6}) vs (0.0526, 1.5526)", refl[0], refl[1]),
    );
    g.check("1d shrink factor", within(k_star, 0.5363), format!("{k_star:.6} vs 0.5363"));
    g.check("1e spiral total cost", within(total, 0.2384), format!("{total:.6} vs 0.2384"));
    g.check("1f quadratic root", (k_star - root).abs() <= 1e-5, format!("{k_star:.6} vs root {root:.6}"));
    g.check("1g runtime", elapsed < 1.0, format!("{elapsed:.3} s"));
}

fn stability_grid(g: &mut Gate) {
    let start = Instant::now();
    let n = 201;
    let (lo, hi) = (-1.5, 2.5);
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for i in 0..n {
        let r1 = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let r2 = lo + (hi - lo) * j as f64 / (n - 1) as f64;
            let s = r1 + r2;
            let boundary = (s + 1.0).abs() <= BOUNDARY_TOL
                || (s - 2.0).abs() <= BOUNDARY_TOL
                || ((r1 - 1.0).abs() <= BOUNDARY_TOL && (r2 - 1.0).abs() <= BOUNDARY_TOL);
            if boundary {
                continue;
            }
            let rep = classify_stability(&RsParams::unit(-1.0, r1, r2).unwrap());
            checked += 1;
            if rep.stable != rep.closed_form_stable {
                mismatches.push((r1, r2));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    g.check(
        "2 stability equivalence",
        mismatches.is_empty(),
        format!("{} mismatches over {checked} cells, first {:?}", mismatches.len(), mismatches.first()),
    );
    g.check("2 runtime", elapsed < 10.0, format!("{elapsed:.3} s"));
}

fn oracle_equivalence(g: &mut Gate) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    let mut worst = 0.0f64;
    let mut failures = 0;
    while compared < 1000 {
        let p = RsParams::new(-rng.gen_range(0.1..2.0), rng.gen_range(-0.4..2.0), rng.gen_range(-0.4..2.0), rng.gen_range(0.5..2.0), 0.0)
            .unwrap();
        if !(1.0 + p.r1 + p.r2 > 0.0) {
            continue;
        }
        let data = p.expand();
        let m = CostModel::new(&data);
        let k = FaceSet::from_bits(rng.gen_range(0..8));
        if k.len() > 2 {
            continue;
        }
        let mut w = Vec3::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
        let mut v = Vec3::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
        for j in k.indices() {
            w[j] = 0.0;
            v[j] = 0.0;
        }
        if !k.is_empty() && !m.reflectivity(k, &(v - w)).is_ok_and(|r| r.holds) {
            continue;
        }
        let closed = m.reflected(k, &w, &v).unwrap().value;
        let numeric = segment_cost_oracle(&w, &v, k, &data).unwrap().cost;
        let rel = (closed - numeric).abs() / closed.abs().max(1.0);
        worst = worst.max(rel);
        if rel >= 1e-6 {
            failures += 1;
        }
        compared += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    g.check("3 oracle equivalence", failures == 0, format!("{failures} of {compared} off, worst relative {worst:.2e}"));
    g.check("3 runtime", elapsed < 30.0, format!("{elapsed:.3} s"));
}

fn lemma_checks(g: &mut Gate) {
    let start = Instant::now();
    let cfg = OracleConfig { samples: 10_000, seed: 42, ..Default::default() };
    let report = lemma_suite(&cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    for c in &report.checks {
        let first = c.records.first().map(|r| format!(", first {:?}", r.values)).unwrap_or_default();
        g.check(&format!("4 {}", c.name), c.violations == 0, format!("{} violations in {}{first}", c.violations, c.samples));
    }
    g.check("4 runtime", elapsed < 60.0, format!("{elapsed:.3} s"));
}

fn spiral_construction(g: &mut Gate) {
    let p = example();
    let class = classify_optimal_path(&p).unwrap();
    let Some(s) = class.spiral else {
        g.check("5 spiral construction", false, "no spiral for the example data");
        return;
    };
    let data = p.expand();
    let build = |n| build_spiral(&p, s.orientation, s.k_star, n).unwrap();
    let (s20, s40, s80) = (build(20), build(40), build(80));
    let valid = validate_triple(&s40.truncated_path, &data);
    g.check("5a n=40 validates", valid.is_ok(), format!("{valid:?}"));
    let err = (s40.truncated_cost - s.total_cost).abs();
    g.check("5b n=40 cost", err <= 1e-6, format!("|{:.12} - {:.12}| = {err:.2e}", s40.truncated_cost, s.total_cost));
    let halve = (s20.truncated_cost - s40.truncated_cost).abs();
    g.check("5c halving n", halve < s20.tail_bound, format!("change {halve:.2e}, tail bound {:.2e}", s20.tail_bound));
    let double = (s80.truncated_cost - s40.truncated_cost).abs();
    g.check("5d doubling n", double < s40.tail_bound, format!("change {double:.2e}, tail bound {:.2e}", s40.tail_bound));
}

fn gradual_never_beats_solver(g: &mut Gate) {
    let cfg = OracleConfig::default();
    let coords: Vec<f64> = (0..5).map(|i| 0.2 + 0.45 * i as f64).collect();
    for (name, p) in [("example", example()), ("identity", RsParams::unit(-1.0, 0.0, 0.0).unwrap())] {
        let start = Instant::now();
        let oracle = GradualOracle::new(&p.expand(), &cfg).unwrap();
        let mut worst = f64::NEG_INFINITY;
        let mut beaten = 0;
        for &a in &coords {
            for &b in &coords {
                for &c in &coords {
                    let v = Vec3::new(a, b, c);
                    let gradual = oracle.value(&v).unwrap();
                    let solver = best_cost_to_point(&p, &v).unwrap().value;
                    worst = worst.max(solver - gradual);
                    if gradual < solver - 1e-6 {
                        beaten += 1;
                    }
                }
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        g.check(
            &format!("6 gradual search vs solver ({name})"),
            beaten == 0,
            format!("{beaten} of 125 points beaten, max solver - gradual {worst:.2e}, {elapsed:.1} s"),
        );
    }
}

fn main() -> ExitCode {
    let mut g = Gate::default();
    reproduction(&mut g);
    stability_grid(&mut g);
    oracle_equivalence(&mut g);
    lemma_checks(&mut g);
    spiral_construction(&mut g);
    gradual_never_beats_solver(&mut g);
    if g.failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} failing: {}", g.failed.len(), g.failed.join(", "));
        ExitCode::FAILURE
    }
}
