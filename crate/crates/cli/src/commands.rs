use std::path::Path;

use octant_vp::costs::{CostModel, Provenance};
use octant_vp::geometry::{unit, FaceSet, RsParams, Vec3};
use octant_vp::oracle::{lemma_suite, OracleConfig, OracleReport};
use octant_vp::solver::{best_cost_to_point, classify_optimal_path, Classification, Verdict};
use serde_json::{json, Value};

use crate::{sig, CliResult, CostArgs, Family, ProblemArgs, Status};

fn point(v: &[f64; 3]) -> String {
    format!("({}, {}, {})", sig(v[0]), sig(v[1]), sig(v[2]))
}

fn arr(v: &Vec3) -> [f64; 3] {
    (*v).into()
}

fn print_json(v: &impl serde::Serialize) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn print_classification(c: &Classification) {
    let p = &c.params;
    let s = &c.stability;
    println!(
        "params: theta0 {}, r1 {}, r2 {}, sigma2 {}, rho {}",
        sig(p.theta0),
        sig(p.r1),
        sig(p.r2),
        sig(p.sigma2),
        sig(p.rho)
    );
    println!("stable: {} (decided by {:?}; closed form {})", s.stable, s.decided_by, s.closed_form_stable);
    println!("completely-S: {}, P-matrix: {}, R^-1 theta < 0: {}", s.completely_s, s.p_matrix, s.r_inv_theta_negative);
    match s.beta {
        Some(b) => println!("region: {:?}, beta {}", s.region, sig(b)),
        None => println!("region: {:?}", s.region),
    }
    println!("condition 1: {}", c.condition1);
    println!("axis cost: {}", sig(c.axis_cost));
    for a in &c.reflectivity {
        let v: Vec<String> = a.check.vector.iter().map(|&x| sig(x)).collect();
        println!(
            "reflectivity on axis {:?} toward {}: ({}) {}",
            a.axis,
            point(&a.target),
            v.join(", "),
            if a.check.holds { "holds" } else { "fails" }
        );
    }
    let w = &c.witness;
    println!("two-piece via face 2: {} at {}", sig(w.via_f2), point(&w.via_f2_point));
    println!("two-piece via face 1: {} at {}", sig(w.via_f1), point(&w.via_f1_point));
    match &c.spiral {
        Some(sp) => println!(
            "spiral: {:?}, k* {}, per-turn cost {}, total {}, {} turns within {}",
            sp.orientation,
            sig(sp.k_star),
            sig(sp.per_turn_cost),
            sig(sp.total_cost),
            sp.truncation_turns,
            sig(sp.tail_bound)
        ),
        None => println!("spiral: none"),
    }
    println!("candidate: {:?}", c.candidate);
    println!("verdict: {:?}", c.verdict);
}

pub fn classify(problem: &ProblemArgs, as_json: bool) -> CliResult<Status> {
    let c = classify_optimal_path(&problem.rs()?)?;
    if as_json {
        print_json(&c)?;
    } else {
        print_classification(&c);
    }
    Ok(if c.verdict == Verdict::Inconclusive { Status::Inconclusive } else { Status::Ok })
}

fn label(i: Option<usize>) -> CliResult<usize> {
    Ok(i.ok_or("--axis-face is required for this family")?)
}

pub fn cost(a: &CostArgs) -> CliResult<Status> {
    let family = a.family;
    let composite = matches!(family, Family::ViaFace | Family::ViaAxis | Family::Gradual | Family::Best);
    if composite && a.from != Vec3::zeros() {
        return Err(format!("{family:?} paths start at the origin; --from is not supported").into());
    }
    for (name, v) in [("--from", &a.from), ("--to", &a.to)] {
        if v.iter().any(|&x| !(x >= 0.0)) {
            return Err(format!("{name} {} is outside the octant", point(&arr(v))).into());
        }
    }
    let mut out = serde_json::Map::new();
    out.insert("family".into(), json!(format!("{family:?}")));
    out.insert("faces".into(), json!(a.faces.to_string()));
    out.insert("from".into(), json!(arr(&a.from)));
    out.insert("to".into(), json!(arr(&a.to)));
    let (value, provenance) = if family == Family::Best {
        let best = best_cost_to_point(&a.problem.rs()?, &a.to)?;
        out.insert("path_family".into(), json!(format!("{:?}", best.family)));
        out.insert("uses_spiral".into(), json!(best.uses_spiral));
        out.insert("inconclusive".into(), json!(best.inconclusive));
        out.insert("path".into(), serde_json::to_value(best.path.to_json())?);
        (best.value, Provenance::Numeric)
    } else {
        let m = CostModel::new(&a.problem.data()?);
        match family {
            Family::Direct => (m.direct(&a.from, &a.to), Provenance::ClosedForm),
            Family::Reflected => {
                let r = m.reflected(a.faces, &a.from, &a.to)?;
                out.insert("lower_bound_only".into(), json!(r.lower_bound_only));
                (r.value, r.provenance)
            }
            Family::OnePiece => {
                let r = m.one_piece(a.faces, &a.from, &a.to)?;
                out.insert("duration".into(), json!(r.duration));
                out.insert("ydot".into(), json!(arr(&r.ydot)));
                (r.cost, r.provenance)
            }
            Family::ViaFace | Family::ViaAxis | Family::Gradual => {
                let r = match family {
                    Family::ViaFace => m.two_piece_via_face(a.faces, &a.to)?,
                    Family::ViaAxis => m.two_piece_via_axis(a.faces, label(a.axis_face)?, &a.to)?,
                    _ => m.three_piece_gradual(a.faces, label(a.axis_face)?, &a.to)?,
                };
                let via: Vec<[f64; 3]> = r.via.iter().map(arr).collect();
                out.insert("via".into(), json!(via));
                (r.value, Provenance::Numeric)
            }
            Family::Best => unreachable!(),
        }
    };
    out.insert("value".into(), json!(value));
    out.insert("provenance".into(), json!(format!("{provenance:?}")));
    if a.json {
        print_json(&Value::Object(out))?;
        return Ok(Status::Ok);
    }
    let how = match provenance {
        Provenance::ClosedForm => "closed form",
        Provenance::Numeric => "numeric",
    };
    println!("{}  ({how})", sig(value));
    if out.get("lower_bound_only") == Some(&json!(true)) {
        println!("note: pushing rate is negative on some face; value is only a lower bound");
    }
    if let Some(Value::Array(via)) = out.get("via") {
        for v in via {
            let p: [f64; 3] = serde_json::from_value(v.clone())?;
            println!("via {}", point(&p));
        }
    }
    if let Some(f) = out.get("path_family") {
        println!("path family: {}", f.as_str().unwrap_or_default());
    }
    if out.get("inconclusive") == Some(&json!(true)) {
        println!("note: condition 1 fails, optimality over all paths is not guaranteed");
    }
    Ok(Status::Ok)
}

const TOLERANCE: f64 = 1e-3;

fn reference() -> RsParams {
    RsParams::unit(-1.0, 1.5, 0.0).expect("reference data is valid")
}

pub fn reproduce(problem: &ProblemArgs, as_json: bool) -> CliResult<Status> {
    let p = reference();
    if problem.given() && problem.rs()? != p {
        return Err("reproduce only runs on the reference data theta0=-1, r1=1.5, r2=0, sigma2=1, rho=0".into());
    }
    let m = CostModel::new(&p.expand());
    let e3 = unit(2);
    let axis = FaceSet::of(&[1, 2])?;
    let c = classify_optimal_path(&p)?;
    let refl = m.reflectivity(axis, &e3)?.vector;
    // Axis {2,3} up to 0.5 e1, then face 2 to e3.
    let u = unit(0) * 0.5;
    let witness = m.one_piece(FaceSet::of(&[2, 3])?, &Vec3::zeros(), &u)?.cost + m.one_piece(FaceSet::of(&[2])?, &u, &e3)?.cost;
    let (k_star, total) = c.spiral.as_ref().map_or((f64::NAN, f64::NAN), |s| (s.k_star, s.total_cost));
    let rows: [(&str, Vec<f64>, Vec<f64>); 5] = [
        ("axis cost", vec![0.4211], vec![m.reflected(axis, &Vec3::zeros(), &e3)?.value]),
        ("witness via 0.5 e1", vec![0.3317], vec![witness]),
        ("reflectivity vector", vec![0.0526, 1.5526], refl),
        ("shrink factor k*", vec![0.5363], vec![k_star]),
        ("spiral total cost", vec![0.2384], vec![total]),
    ];
    let mut all = true;
    let mut report = Vec::new();
    for (name, expected, computed) in rows {
        let pass = expected.len() == computed.len()
            && expected.iter().zip(&computed).all(|(e, x)| (e - x).abs() <= TOLERANCE);
        all &= pass;
        report.push((name, expected, computed, pass));
    }
    if as_json {
        let items: Vec<Value> = report
            .iter()
            .map(|(n, e, x, ok)| json!({"name": n, "expected": e, "computed": x, "pass": ok}))
            .collect();
        print_json(&json!({"tolerance": TOLERANCE, "quantities": items, "all_pass": all}))?;
    } else {
        let show = |v: &[f64]| v.iter().map(|&x| sig(x)).collect::<Vec<_>>().join(", ");
        for (n, e, x, ok) in &report {
            println!("{:<20} expected ({})  computed ({})  {}", n, show(e), show(x), if *ok { "pass" } else { "FAIL" });
        }
        println!("{}", if all { "all quantities reproduce" } else { "some quantities do not reproduce" });
    }
    Ok(if all { Status::Ok } else { Status::ValidationFailed })
}

fn failing(report: &OracleReport) -> Value {
    let checks: Vec<_> = report.checks.iter().filter(|c| c.violations > 0 && !c.expect_violations).collect();
    json!({"seed": report.seed, "samples": report.samples, "violations": checks})
}

pub fn validate(seed: u64, samples: usize, adversarial: bool, as_json: bool, output: Option<&Path>) -> CliResult<Status> {
    let cfg = OracleConfig { samples, seed, adversarial, ..Default::default() };
    let report = lemma_suite(&cfg)?;
    if let Some(path) = output {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    let bad = report.unexpected_violations();
    if as_json {
        print_json(&report)?;
    } else {
        for c in &report.checks {
            let note = if c.expect_violations { " (expected)" } else { "" };
            println!("{:<28} {} violations in {}{note}", c.name, c.violations, c.samples);
        }
        let s = &report.condition1_survey;
        println!(
            "condition 1 survey: holds on {} of {} cells, least margin {} at ({}, {})",
            s.holds,
            s.cells,
            sig(s.min_margin),
            sig(s.min_margin_at[0]),
            sig(s.min_margin_at[1])
        );
        if bad > 0 {
            print_json(&failing(&report))?;
        }
    }
    Ok(if bad > 0 { Status::ValidationFailed } else { Status::Ok })
}
