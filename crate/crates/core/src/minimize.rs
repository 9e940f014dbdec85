//! Derivative-free minimizers used by the cost compositions: a coarse
//! scan followed by golden-section refinement in 1-D, and a grid followed
//! by compass search in 2-D. Ties always go to the smaller parameter.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Min1 {
    pub x: f64,
    pub fx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Min2 {
    pub x: [f64; 2],
    pub fx: f64,
}

fn better1(a: Min1, b: Min1) -> Min1 {
    if b.fx < a.fx || (b.fx == a.fx && b.x < a.x) {
        b
    } else {
        a
    }
}

/// Golden-section search on `[a, b]` until the bracket is below `tol`.
pub fn golden<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Min1 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a) > tol && iters < 200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    better1(Min1 { x: c, fx: fc }, Min1 { x: d, fx: fd })
}

/// Scans `points` equally spaced values on `[lo, hi]`, then refines the
/// bracket around the best one with golden section to `tol`.
pub fn scan_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, points: usize, tol: f64) -> Min1 {
    let n = points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect();
    let mut best_i = 0;
    let mut best = Min1 { x: xs[0], fx: f(xs[0]) };
    for (i, &x) in xs.iter().enumerate().skip(1) {
        let fx = f(x);
        if fx < best.fx {
            best = Min1 { x, fx };
            best_i = i;
        }
    }
    if !best.fx.is_finite() || step == 0.0 {
        return best;
    }
    let a = xs[best_i.saturating_sub(1)];
    let b = xs[(best_i + 1).min(n - 1)];
    let refined = golden(&mut f, a, b, tol);
    let mut out = better1(best, refined);
    for &end in [a, b].iter() {
        if end == lo || end == hi {
            out = better1(out, Min1 { x: end, fx: f(end) });
        }
    }
    out
}

/// Minimizes over the box `[lo, hi]` with an `n × n` grid, then runs a
/// compass search from each of the `seeds` best grid points until the step
/// drops below `tol`.
pub fn grid_compass<F: FnMut([f64; 2]) -> f64>(
    mut f: F,
    lo: [f64; 2],
    hi: [f64; 2],
    n: usize,
    seeds: usize,
    tol: f64,
) -> Min2 {
    let n = n.max(2);
    let h = [(hi[0] - lo[0]) / (n - 1) as f64, (hi[1] - lo[1]) / (n - 1) as f64];
    let mut pts: Vec<Min2> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = [lo[0] + h[0] * i as f64, lo[1] + h[1] * j as f64];
            pts.push(Min2 { x, fx: f(x) });
        }
    }
    pts.sort_by(|a, b| {
        a.fx.partial_cmp(&b.fx)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.x[0].total_cmp(&b.x[0]))
            .then(a.x[1].total_cmp(&b.x[1]))
    });
    let mut best = pts[0];
    for seed in pts.iter().take(seeds.max(1)) {
        if !seed.fx.is_finite() {
            continue;
        }
        let r = compass(&mut f, *seed, lo, hi, h, tol);
        if r.fx < best.fx || (r.fx == best.fx && r.x < best.x) {
            best = r;
        }
    }
    best
}

fn compass<F: FnMut([f64; 2]) -> f64>(
    f: &mut F,
    start: Min2,
    lo: [f64; 2],
    hi: [f64; 2],
    h0: [f64; 2],
    tol: f64,
) -> Min2 {
    let mut cur = start;
    let mut h = h0;
    let mut evals = 0usize;
    while (h[0] > tol || h[1] > tol) && evals < 20_000 {
        let mut moved = false;
        for (k, s) in [(0, -1.0), (0, 1.0), (1, -1.0), (1, 1.0)] {
            let mut x = cur.x;
            x[k] = (x[k] + s * h[k]).clamp(lo[k], hi[k]);
            if x == cur.x {
                continue;
            }
            let fx = f(x);
            evals += 1;
            if fx < cur.fx {
                cur = Min2 { x, fx };
                moved = true;
                break;
            }
        }
        if !moved {
            h = [h[0] * 0.5, h[1] * 0.5];
        }
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_quadratic() {
        let m = golden(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        // Flat minimum: x is only resolved to about sqrt(eps).
        assert!((m.x - 0.3).abs() < 1e-7);
        assert!((m.fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scan_finds_global_of_bimodal() {
        let f = |x: f64| ((x - 0.2).powi(2)).min((x - 0.8).powi(2) - 0.01);
        let m = scan_golden(f, 0.0, 1.0, 64, 1e-10);
        assert!((m.x - 0.8).abs() < 1e-8);
    }

    #[test]
    fn scan_keeps_endpoint_minimum() {
        let m = scan_golden(|x| x, 0.0, 1.0, 64, 1e-10);
        assert_eq!(m.x, 0.0);
        let m = scan_golden(|x| -x, 0.0, 1.0, 64, 1e-10);
        assert_eq!(m.x, 1.0);
    }

    #[test]
    fn ties_prefer_smaller() {
        let m = scan_golden(|_| 1.0, 0.0, 1.0, 8, 1e-10);
        assert_eq!(m.x, 0.0);
    }

    #[test]
    fn compass_on_bowl() {
        let m = grid_compass(
            |x| (x[0] - 1.234).powi(2) + 2.0 * (x[1] - 0.5).powi(2),
            [0.0, 0.0],
            [4.0, 4.0],
            32,
            2,
            1e-11,
        );
        assert!((m.x[0] - 1.234).abs() < 1e-8 && (m.x[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn compass_respects_box() {
        let m = grid_compass(|x| x[0] + x[1], [0.0, 0.0], [1.0, 1.0], 8, 1, 1e-11);
        assert_eq!(m.x, [0.0, 0.0]);
    }
}
