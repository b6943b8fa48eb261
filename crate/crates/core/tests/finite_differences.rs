//! Automatic derivatives against central differences of plain `f64`
//! evaluations.

use quartic_finsler::expr::ScalarExpr;
use quartic_finsler::flatness::hamel_residual;
use quartic_finsler::forms::Potential;
use quartic_finsler::geodesic::spray_of;
use quartic_finsler::metric::{DirectionPoint, ManifoldPatch, Variant};

const H: f64 = 1e-4;

fn patch() -> ManifoldPatch {
    ManifoldPatch::from_sources(
        "fd",
        vec![[-2.0, 2.0]; 2],
        &["exp(0.3*x1) + 0.1*x2^2", "0.2*sin(x1*x2)", "0.2*sin(x1*x2)", "1 + 0.2*x1^2"],
        &["0.15*cos(x2) - 0.1*x1", "0.2*x1*x2"],
    )
    .unwrap()
}

fn f(p: &ManifoldPatch, x: [f64; 2], y: [f64; 2], v: Variant) -> f64 {
    p.finsler(&DirectionPoint::new(x, y), v).unwrap()
}

fn bump(z: [f64; 2], i: usize, h: f64) -> [f64; 2] {
    let mut z = z;
    z[i] += h;
    z
}

fn close(auto: f64, fd: f64, tol: f64) {
    assert!((auto - fd).abs() <= tol * (1.0 + fd.abs()), "auto {auto} vs finite difference {fd}");
}

const POINTS: [([f64; 2], [f64; 2]); 4] =
    [([0.3, -0.4], [1.0, 0.5]), ([-1.1, 0.7], [-0.2, 1.3]), ([0.0, 0.0], [0.6, -0.8]), ([1.2, 1.0], [-1.5, -0.4])];

#[test]
fn first_and_second_derivatives_of_f() {
    let p = patch();
    for v in [Variant::Forward, Variant::Reverse, Variant::Quartic] {
        for (x, y) in POINTS {
            let jet = p.fields(&x).unwrap().jet_f(&y, v).unwrap();
            close(jet.value, f(&p, x, y, v), 1e-14);
            for i in 0..2 {
                let dx = (f(&p, bump(x, i, H), y, v) - f(&p, bump(x, i, -H), y, v)) / (2.0 * H);
                let dy = (f(&p, x, bump(y, i, H), v) - f(&p, x, bump(y, i, -H), v)) / (2.0 * H);
                close(jet.dx[i], dx, 1e-7);
                close(jet.dy[i], dy, 1e-7);
                for j in 0..2 {
                    let dyj = |x: [f64; 2], y: [f64; 2]| {
                        (f(&p, x, bump(y, j, H), v) - f(&p, x, bump(y, j, -H), v)) / (2.0 * H)
                    };
                    let dyy = (dyj(x, bump(y, i, H)) - dyj(x, bump(y, i, -H))) / (2.0 * H);
                    let dyx = (dyj(bump(x, i, H), y) - dyj(bump(x, i, -H), y)) / (2.0 * H);
                    close(jet.dyy[(j, i)], dyy, 1e-5);
                    close(jet.dyx[(j, i)], dyx, 1e-5);
                }
            }
        }
    }
}

#[test]
fn hamel_residual_by_differences() {
    let p = patch();
    for (x, y) in POINTS {
        let auto = hamel_residual(&p, &DirectionPoint::new(x, y), Variant::Forward).unwrap();
        for k in 0..2 {
            let dyk = |x: [f64; 2]| {
                (f(&p, x, bump(y, k, H), Variant::Forward) - f(&p, x, bump(y, k, -H), Variant::Forward)) / (2.0 * H)
            };
            // ∂/∂x along y of ∂F/∂yᵏ
            let along = (dyk([x[0] + H * y[0], x[1] + H * y[1]]) - dyk([x[0] - H * y[0], x[1] - H * y[1]])) / (2.0 * H);
            let dxk = (f(&p, bump(x, k, H), y, Variant::Forward) - f(&p, bump(x, k, -H), y, Variant::Forward)) / (2.0 * H);
            close(auto[k], along - dxk, 1e-5);
        }
    }
}

#[test]
fn spray_by_differences() {
    let p = patch();
    let f2 = |x: [f64; 2], y: [f64; 2]| f(&p, x, y, Variant::Forward).powi(2);
    for (x, y) in POINTS {
        let mut g = nalgebra::Matrix2::zeros();
        let mut rhs = nalgebra::Vector2::zeros();
        for l in 0..2 {
            let dyl = |x: [f64; 2], y: [f64; 2]| (f2(x, bump(y, l, H)) - f2(x, bump(y, l, -H))) / (2.0 * H);
            for m in 0..2 {
                g[(l, m)] = 0.5 * (dyl(x, bump(y, m, H)) - dyl(x, bump(y, m, -H))) / (2.0 * H);
            }
            let along = (dyl([x[0] + H * y[0], x[1] + H * y[1]], y) - dyl([x[0] - H * y[0], x[1] - H * y[1]], y)) / (2.0 * H);
            let dxl = (f2(bump(x, l, H), y) - f2(bump(x, l, -H), y)) / (2.0 * H);
            rhs[l] = 0.25 * (along - dxl);
        }
        let expect = g.try_inverse().unwrap() * rhs;
        let got = spray_of(&p, &DirectionPoint::new(x, y), Variant::Forward).unwrap().g;
        for i in 0..2 {
            close(got[i], expect[i], 1e-5);
        }
    }
}

#[test]
fn expression_gradient_and_hessian() {
    let e = ScalarExpr::parse("x1^3*sin(x2) + exp(-x1*x2)/(1 + x2^2) - sqrt(2 + cos(x1))", 2).unwrap();
    let val = |z: [f64; 2]| e.eval(&z).unwrap();
    for (z, _) in POINTS {
        let jet = e.eval_jet2(&z).unwrap();
        let (v, grad) = e.eval_grad(&z).unwrap();
        assert_eq!(v, jet.value);
        for i in 0..2 {
            let d = (val(bump(z, i, H)) - val(bump(z, i, -H))) / (2.0 * H);
            close(grad[i], d, 1e-7);
            close(jet.grad[i], grad[i], 1e-14);
            for j in 0..2 {
                let di = |z: [f64; 2]| (val(bump(z, i, H)) - val(bump(z, i, -H))) / (2.0 * H);
                close(jet.hess[i][j], (di(bump(z, j, H)) - di(bump(z, j, -H))) / (2.0 * H), 1e-5);
            }
        }
    }
}

#[test]
fn potential_gradient_by_differences() {
    let p = ManifoldPatch::from_sources(
        "exact",
        vec![[-2.0, 2.0]; 2],
        &["1", "0", "0", "1"],
        &["0.2*x2*cos(x1*x2)", "0.2*x1*cos(x1*x2) + 0.1"],
    )
    .unwrap();
    let v = Potential::new(&p, &[-0.5, 0.5]).unwrap();
    for (z, _) in POINTS {
        let auto = v.gradient(&z).unwrap();
        for i in 0..2 {
            let d = (v.value(&bump(z, i, H)).unwrap() - v.value(&bump(z, i, -H)).unwrap()) / (2.0 * H);
            close(auto[i], d, 1e-6);
        }
        // V(x) = 0.2 (sin(x1 x2) − sin(−0.25)) + 0.1 (x2 − 0.5), up to the
        // O(h⁴) error of the segment quadrature
        let exact = 0.2 * ((z[0] * z[1]).sin() - (-0.25f64).sin()) + 0.1 * (z[1] - 0.5);
        close(v.value(&z).unwrap(), exact, 1e-7);
    }
}
