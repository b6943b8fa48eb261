//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use quartic_finsler::config::{catalog, catalog_patch};
use quartic_finsler::flatness::flatness_report;
use quartic_finsler::forms::{closedness_report, Potential};
use quartic_finsler::geodesic::{
    closed_form_criterion, el_reversibility_residual, integrate_geodesic, trace_reversibility_defect,
    REVERSIBLE_DEFECT_THRESHOLD,
};
use quartic_finsler::metric::{DirectionPoint, ManifoldPatch, Variant};
use quartic_finsler::quasimetric::{
    distance, distance_oracle_grid, triangle_orientation_report, weightability_report,
};
use quartic_finsler::sampling::Sampler;

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome { pass, summary: summary.into() }
}

fn closed(p: &ManifoldPatch) -> bool {
    closedness_report(p, 9).unwrap().pass
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn euler_identity() -> Outcome {
    let mut worst = 0.0f64;
    for p in catalog() {
        let mut s = Sampler::new(101);
        for _ in 0..200 {
            let mut dp = s.direction_point(&p);
            dp = dp.scaled(s.uniform(0.2, 3.0));
            let f = p.f_value(&dp).unwrap();
            let q = p.fundamental_tensor(&dp).unwrap().quadratic_form();
            worst = worst.max(((q - f * f) / (f * f)).abs());
        }
    }
    outcome(worst < 1e-8, format!("max relative |g(y,y) - F^2| = {worst:.2e} over 6x200 samples (tol 1e-8)"))
}

fn el_identity() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for p in catalog() {
        let mut s = Sampler::new(202);
        let mut worst = 0.0f64;
        for dp in s.direction_points(&p, 100) {
            let el = el_reversibility_residual(&p, &dp).unwrap();
            let cf = closed_form_criterion(&p, &dp).unwrap();
            worst = worst.max(sup(&el.iter().zip(&cf).map(|(a, b)| a - b).collect::<Vec<_>>()));
        }
        pass &= worst <= 1e-8;
        lines.push(format!("{}={worst:.1e}", p.name()));
    }
    let rot = catalog_patch("rotational").unwrap();
    let dp = DirectionPoint::new([1.0, 1.0], [1.0, 0.0]);
    let el = el_reversibility_residual(&rot, &dp).unwrap();
    let cf = closed_form_criterion(&rot, &dp).unwrap();
    let near = |v: &[f64]| v[0].abs() < 1e-4 && (v[1] - 0.1998).abs() < 1e-4;
    pass &= near(&el) && near(&cf);
    outcome(
        pass,
        format!(
            "max |EL - criterion| per patch: {}; rotational at x=(1,1), y=(1,0): EL=({:.4}, {:.4}), criterion=({:.4}, {:.4}) (tol 1e-8)",
            lines.join(", "),
            el[0],
            el[1],
            cf[0],
            cf[1]
        ),
    )
}

// Trace-reversal defect per catalog patch at t_end = 2 with 1024 steps.
fn reversal_defects() -> Vec<(String, bool, f64)> {
    catalog()
        .into_iter()
        .map(|p| {
            let mut s = Sampler::new(303);
            let samples: Vec<DirectionPoint> = (0..3)
                .map(|_| {
                    let dp = s.direction_point(&p);
                    DirectionPoint::new(dp.x.iter().map(|c| 0.5 * c).collect::<Vec<_>>(), dp.y).scaled(0.5)
                })
                .collect();
            let r = trace_reversibility_defect(&p, &samples, 2.0, 1024).unwrap();
            (p.name().to_string(), closed(&p), r.max_residual)
        })
        .collect()
}

fn biconditional(defects: &[(String, bool, f64)]) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, is_closed, defect) in defects {
        let ok = if *is_closed { *defect < REVERSIBLE_DEFECT_THRESHOLD } else { *defect > 1e-2 };
        pass &= ok;
        lines.push(format!("{name}: closed={is_closed} defect={defect:.2e}"));
    }
    outcome(pass, lines.join("; "))
}

fn riemannian_reduction() -> Outcome {
    // Levi-Civita geodesics of λ(x)·I with λ = exp(0.2 x¹), and of the flat plane
    let conformal_accel = |_x: &[f64], y: &[f64]| -> Vec<f64> {
        let grad = [0.2, 0.0];
        let gy = grad[0] * y[0] + grad[1] * y[1];
        let yy = y[0] * y[0] + y[1] * y[1];
        (0..2).map(|i| -(y[i] * gy - 0.5 * yy * grad[i])).collect()
    };
    let flat_accel = |_x: &[f64], _y: &[f64]| vec![0.0, 0.0];
    let rk4 = |accel: &dyn Fn(&[f64], &[f64]) -> Vec<f64>, x0: [f64; 2], y0: [f64; 2], t: f64, n: usize| {
        let h = t / n as f64;
        let (mut x, mut y) = (x0.to_vec(), y0.to_vec());
        let add = |a: &[f64], s: f64, b: &[f64]| a.iter().zip(b).map(|(p, q)| p + s * q).collect::<Vec<f64>>();
        for _ in 0..n {
            let (k1x, k1y) = (y.clone(), accel(&x, &y));
            let (x2, y2) = (add(&x, 0.5 * h, &k1x), add(&y, 0.5 * h, &k1y));
            let (k2x, k2y) = (y2.clone(), accel(&x2, &y2));
            let (x3, y3) = (add(&x, 0.5 * h, &k2x), add(&y, 0.5 * h, &k2y));
            let (k3x, k3y) = (y3.clone(), accel(&x3, &y3));
            let (x4, y4) = (add(&x, h, &k3x), add(&y, h, &k3y));
            let (k4x, k4y) = (y4.clone(), accel(&x4, &y4));
            x = (0..2).map(|i| x[i] + h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i])).collect();
            y = (0..2).map(|i| y[i] + h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i])).collect();
        }
        x
    };
    let mut worst = 0.0f64;
    let starts = [([0.0, 0.0], [1.0, 0.5]), ([-1.0, 1.0], [0.3, -1.0]), ([1.5, -0.5], [-0.8, -0.6])];
    for (name, accel) in [("conformal", &conformal_accel as &dyn Fn(&[f64], &[f64]) -> Vec<f64>), ("riemannian-only", &flat_accel)] {
        let p = catalog_patch(name).unwrap();
        for (x0, y0) in starts {
            let path = integrate_geodesic(&p, &x0, &y0, 1.5, 200).unwrap();
            let oracle = rk4(accel, x0, y0, 1.5, 200);
            worst = worst.max(sup(&[path.end().x[0] - oracle[0], path.end().x[1] - oracle[1]]));
        }
    }
    let d = distance(&catalog_patch("riemannian-only").unwrap(), &[0.0, 0.0], &[3.0, 4.0]).unwrap().value;
    outcome(
        worst < 1e-6 && (d - 5.0).abs() < 1e-6,
        format!("max endpoint gap vs Levi-Civita RK4 = {worst:.2e} (tol 1e-6); d((0,0),(3,4)) = {d:.9} (5 +- 1e-6)"),
    )
}

fn flatness(defects: &[(String, bool, f64)]) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (p, (_, _, defect)) in catalog().iter().zip(defects) {
        let mut s = Sampler::new(505);
        let r = flatness_report(p, &s.direction_points(p, 16)).unwrap();
        let flat = r.hamel_forward < 1e-8;
        let ok = r.flat_iff_quartic_flat && (!flat || *defect < REVERSIBLE_DEFECT_THRESHOLD);
        pass &= ok;
        lines.push(format!("{}: F {:.1e} / quartic {:.1e}", p.name(), r.hamel_forward, r.hamel_quartic));
    }
    outcome(pass, format!("Hamel residuals {}; flat patches reversible", lines.join(", ")))
}

fn oracle_agreement() -> Outcome {
    let pairs = [([0.0, 0.0], [1.0, 0.0]), ([-1.0, -1.0], [1.0, 1.0]), ([0.0, 0.0], [2.0, 1.0]), ([-2.0, 1.0], [2.0, -1.0]), ([0.0, 0.0], [0.0, 2.0])];
    let (mut worst_rel, mut worst_over) = (0.0f64, f64::NEG_INFINITY);
    for p in catalog() {
        for (x, y) in pairs {
            for (a, b) in [(x, y), (y, x)] {
                let d = distance(&p, &a, &b).unwrap().value;
                let o = distance_oracle_grid(&p, &a, &b, 64).unwrap().value;
                worst_rel = worst_rel.max((d - o).abs() / o);
                worst_over = worst_over.max(d - o);
            }
        }
    }
    let e = catalog_patch("euclidean-exact").unwrap();
    let fwd = distance(&e, &[0.0, 0.0], &[1.0, 0.0]).unwrap().value;
    let bwd = distance(&e, &[1.0, 0.0], &[0.0, 0.0]).unwrap().value;
    let pass = worst_rel <= 0.02 && worst_over <= 1e-9 && (fwd - 1.200400).abs() <= 1e-4 && (bwd - 0.800400).abs() <= 1e-4;
    outcome(
        pass,
        format!(
            "max |d - oracle|/oracle = {:.2}% (tol 2%), max d - oracle = {worst_over:.1e}; euclidean-exact d = {fwd:.6} / {bwd:.6}",
            100.0 * worst_rel
        ),
    )
}

fn weightability() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for p in catalog().into_iter().filter(closed) {
        let mut s = Sampler::new(707);
        let pairs = s.pairs(&p, 50);
        let r = weightability_report(&p, &[0.0, 0.0], &pairs).unwrap();
        let get = |l: &str| r.detail(l).unwrap().value;
        let (sym, slack, pot) = (get("symmetrized_form_residual"), get("half_weight_gap_minus_rho"), get("weight_potential_residual"));
        pass &= r.max_residual < 1e-4 && sym < 1e-4 && slack <= 1e-6 && pot < 1e-4 && get("non_converged") == 0.0;
        lines.push(format!("{}: axiom4 {:.1e}, sym-form {sym:.1e}, slack {slack:.2}, w-2dV {pot:.1e}", p.name(), r.max_residual));
    }
    // sanity on the potential used above
    let v = Potential::new(&catalog_patch("euclidean-exact").unwrap(), &[0.0, 0.0]).unwrap().value(&[1.0, 0.0]).unwrap();
    pass &= (v - 0.2).abs() < 1e-12;
    outcome(pass, lines.join("; "))
}

fn triangles() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for p in catalog().into_iter().filter(closed) {
        let mut s = Sampler::new(808);
        let r = triangle_orientation_report(&p, &s.triples(&p, 20)).unwrap();
        pass &= r.max_residual < 1e-4;
        lines.push(format!("{}={:.1e}", p.name(), r.max_residual));
    }
    let e = catalog_patch("euclidean-exact").unwrap();
    let tri = [[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]];
    let r = triangle_orientation_report(&e, &tri).unwrap();
    let (fwd, bwd) = (r.detail("first_perimeter_forward").unwrap().value, r.detail("first_perimeter_backward").unwrap().value);
    pass &= (fwd - 3.414755).abs() <= 1e-4 && (bwd - 3.414755).abs() <= 1e-4;
    outcome(pass, format!("orientation defects {}; unit triangle sums {fwd:.6} / {bwd:.6}", lines.join(", ")))
}

fn hygiene() -> Outcome {
    let h = 1e-5;
    let mut worst = 0.0f64;
    let close = |d: f64, fd: f64| (d - fd).abs() / fd.abs().max(1.0);
    let patches = catalog();
    let mut s = Sampler::new(909);
    for k in 0..50 {
        let p = &patches[k % patches.len()];
        let dp = s.direction_point(p).scaled(s.uniform(0.5, 2.0));
        let f = |x: &[f64], y: &[f64]| p.f_value(&DirectionPoint::new(x, y)).unwrap();
        let jet = p.fields(&dp.x).unwrap().jet_f(&dp.y, Variant::Forward).unwrap();
        let g = p.fundamental_tensor(&dp).unwrap().g;
        for i in 0..2 {
            let shift = |v: &[f64], i: usize, t: f64| {
                let mut w = v.to_vec();
                w[i] += t;
                w
            };
            let fdx = (f(&shift(&dp.x, i, h), &dp.y) - f(&shift(&dp.x, i, -h), &dp.y)) / (2.0 * h);
            let fdy = (f(&dp.x, &shift(&dp.y, i, h)) - f(&dp.x, &shift(&dp.y, i, -h))) / (2.0 * h);
            worst = worst.max(close(jet.dx[i], fdx)).max(close(jet.dy[i], fdy));
            for j in 0..2 {
                let f2 = |si: f64, sj: f64| f(&dp.x, &shift(&shift(&dp.y, i, si * h), j, sj * h)).powi(2);
                let fd = (f2(1.0, 1.0) - f2(1.0, -1.0) - f2(-1.0, 1.0) + f2(-1.0, -1.0)) / (8.0 * h * h);
                worst = worst.max(close(g[(i, j)], fd));
            }
            for e in p.a_exprs().iter().chain(p.b_exprs()) {
                let (_, grad) = e.eval_grad(&dp.x).unwrap();
                let fd = (e.eval(&shift(&dp.x, i, h)).unwrap() - e.eval(&shift(&dp.x, i, -h)).unwrap()) / (2.0 * h);
                worst = worst.max(close(grad[i], fd));
            }
        }
    }
    // RK4 order on the curved conformal patch
    let p = catalog_patch("conformal").unwrap();
    let end = |n: usize| integrate_geodesic(&p, &[0.0, 0.0], &[1.0, 0.5], 2.0, n).unwrap().end().x.clone();
    let reference = end(160);
    let err = |n: usize| {
        let e = end(n);
        ((e[0] - reference[0]).powi(2) + (e[1] - reference[1]).powi(2)).sqrt()
    };
    let ratio = err(8) / err(16);
    outcome(
        worst <= 1e-5 && (ratio - 16.0).abs() <= 4.0,
        format!("max |dual - central FD| = {worst:.1e} (tol 1e-5); RK4 error ratio 8->16 steps = {ratio:.2} (16 +- 25%)"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let defects = reversal_defects();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("euler identity", Box::new(euler_identity)),
        ("Euler-Lagrange residual equals closed-form criterion", Box::new(el_identity)),
        ("closedness <=> trace reversibility", Box::new(|| biconditional(&defects))),
        ("Riemannian reduction", Box::new(riemannian_reduction)),
        ("projective flatness of F <=> of the quartic part", Box::new(|| flatness(&defects))),
        ("distance vs grid oracle", Box::new(oracle_agreement)),
        ("weightability", Box::new(weightability)),
        ("triangle orientation", Box::new(triangles)),
        ("numerical hygiene", Box::new(hygiene)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] criterion {} {name}: {} ({:.1}s)", k + 1, o.summary, t.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
