use std::io::Write;

use octant_vp::geometry::RsParams;
use octant_vp::solver::{classify_optimal_path, condition1};
use octant_vp::stability::classify_stability;
use rayon::prelude::*;

use crate::{CliResult, Status, SweepArgs};

pub const HEADER: [&str; 11] = [
    "r1",
    "r2",
    "theta0",
    "stable",
    "completely_s",
    "p_matrix",
    "condition1",
    "axis_cost",
    "spiral_cost",
    "k_star",
    "verdict",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cell(theta0: f64, r1: f64, r2: f64) -> Vec<String> {
    let mut row = vec![r1.to_string(), r2.to_string(), theta0.to_string()];
    let Ok(p) = RsParams::unit(theta0, r1, r2) else {
        row.resize(HEADER.len(), String::new());
        return row;
    };
    let s = classify_stability(&p);
    let class = if s.stable { classify_optimal_path(&p).ok() } else { None };
    let spiral = class.as_ref().and_then(|c| c.spiral.as_ref());
    row.extend([
        s.stable.to_string(),
        s.completely_s.to_string(),
        s.p_matrix.to_string(),
        condition1(r1.max(r2), r1.min(r2)).to_string(),
        opt(class.as_ref().map(|c| c.axis_cost)),
        opt(spiral.map(|s| s.total_cost)),
        opt(spiral.map(|s| s.k_star)),
        class.map(|c| format!("{:?}", c.verdict)).unwrap_or_default(),
    ]);
    row
}

fn threads() -> CliResult<Option<usize>> {
    match std::env::var("OCTANT_VP_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("OCTANT_VP_THREADS must be a positive integer, got {v:?}").into()),
        },
        Err(_) => Ok(None),
    }
}

pub fn rows(a: &SweepArgs) -> CliResult<Vec<Vec<String>>> {
    let mut points: Vec<(f64, f64)> = (0..a.r1_range.steps)
        .flat_map(|i| (0..a.r2_range.steps).map(move |j| (i, j)))
        .map(|(i, j)| (a.r1_range.value(i), a.r2_range.value(j)))
        .collect();
    points.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let theta0 = a.theta0;
    Ok(pool.install(|| points.par_iter().map(|&(r1, r2)| cell(theta0, r1, r2)).collect()))
}

pub fn run(a: &SweepArgs) -> CliResult<Status> {
    if !a.theta0.is_finite() {
        return Err("--theta0 must be finite".into());
    }
    // Open the destination first so an unwritable path fails before any work.
    let sink: Box<dyn Write> = match &a.output {
        Some(path) => Box::new(
            std::fs::File::create(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let rows = rows(a)?;
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for r in &rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(Status::Ok)
}
