//! `d_F(x, y)` by polyline descent followed by single shooting.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesic::{integrate_geodesic, GeodesicPath, PathNode};
use crate::metric::{ManifoldPatch, Variant};
use crate::quadrature::GL2;

/// Endpoints closer than this (coordinate distance) are the same point.
pub const COINCIDENCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMethod {
    Shooting,
    PolylineDescent,
    GraphOracle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistancePath {
    Polyline(Vec<Vec<f64>>),
    Geodesic(GeodesicPath),
}

impl DistancePath {
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self {
            DistancePath::Polyline(p) => p.clone(),
            DistancePath::Geodesic(g) => g.positions(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult {
    pub value: f64,
    pub path: DistancePath,
    pub method: DistanceMethod,
    pub converged: bool,
    /// Length of the best polyline, an upper bound for `value`.
    pub descent_value: f64,
    pub iterations: usize,
}

impl DistanceResult {
    /// The optimal path in the geodesic CSV layout. Polylines are
    /// parametrized uniformly over `t ∈ [0, 1]` with segment velocities.
    pub fn to_csv(&self, patch: &ManifoldPatch) -> Result<String> {
        match &self.path {
            DistancePath::Geodesic(g) => Ok(g.to_csv()),
            DistancePath::Polyline(pts) => {
                let m = pts.len().saturating_sub(1).max(1) as f64;
                let mut nodes = Vec::with_capacity(pts.len());
                for (k, x) in pts.iter().enumerate() {
                    let (p, q) = if k + 1 < pts.len() { (x, &pts[k + 1]) } else { (&pts[k.saturating_sub(1)], x) };
                    let y: Vec<f64> = q.iter().zip(p).map(|(a, b)| (a - b) * m).collect();
                    let speed = patch.field_values(x)?.finsler(&y, Variant::Forward);
                    nodes.push(PathNode { t: k as f64 / m, x: x.clone(), y, speed });
                }
                Ok(GeodesicPath { nodes, step: 1.0 / m, variant: Variant::Forward, truncated: false }.to_csv())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceOptions {
    /// Polyline nodes including both endpoints.
    pub nodes: usize,
    /// Stop descent once the relative length improvement drops below this.
    pub rel_tol: f64,
    pub max_iters: usize,
    /// RK4 steps over the unit shooting interval; zero disables shooting.
    pub shooting_steps: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { nodes: 33, rel_tol: 1e-10, max_iters: 4000, shooting_steps: 128 }
    }
}

pub fn distance(patch: &ManifoldPatch, x: &[f64], y: &[f64]) -> Result<DistanceResult> {
    distance_with(patch, x, y, &DistanceOptions::default())
}

pub fn distance_with(patch: &ManifoldPatch, x: &[f64], y: &[f64], opts: &DistanceOptions) -> Result<DistanceResult> {
    let n = patch.dim();
    for p in [x, y] {
        if p.len() != n {
            return Err(Error::Dimension { expected: n, got: p.len() });
        }
        if !patch.contains(p) {
            return Err(Error::OutsideDomain { x: p.to_vec() });
        }
    }
    if opts.nodes < 3 {
        return Err(Error::Invalid(format!("polyline needs at least 3 nodes, got {}", opts.nodes)));
    }
    let gap: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if gap < COINCIDENCE {
        return Ok(DistanceResult {
            value: 0.0,
            path: DistancePath::Polyline(vec![x.to_vec()]),
            method: DistanceMethod::PolylineDescent,
            converged: true,
            descent_value: 0.0,
            iterations: 0,
        });
    }

    let (pts, descent_value, converged, iterations) = descend(patch, x, y, opts)?;
    let polyline: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().copied().collect()).collect();
    let fallback = DistanceResult {
        value: descent_value,
        path: DistancePath::Polyline(polyline),
        method: DistanceMethod::PolylineDescent,
        converged,
        descent_value,
        iterations,
    };
    if !converged || opts.shooting_steps == 0 {
        return Ok(fallback);
    }
    // initial velocity along the first segment with F-speed equal to the descent length
    let first = &pts[1] - &pts[0];
    let s = patch.field_values(x)?.finsler(first.as_slice(), Variant::Forward);
    let v0: Vec<f64> = first.iter().map(|c| c * descent_value / s).collect();
    match shoot(patch, x, y, v0, opts.shooting_steps)? {
        Some(path) if path.length() <= descent_value => Ok(DistanceResult {
            value: path.length(),
            path: DistancePath::Geodesic(path),
            method: DistanceMethod::Shooting,
            ..fallback
        }),
        _ => Ok(fallback),
    }
}

/// `F`-length of a polyline, 2-point Gauss–Legendre per segment.
pub fn polyline_length(patch: &ManifoldPatch, pts: &[Vec<f64>]) -> Result<f64> {
    let pts: Vec<DVector<f64>> = pts.iter().map(|p| DVector::from_column_slice(p)).collect();
    length(patch, &pts)
}

fn length(patch: &ManifoldPatch, pts: &[DVector<f64>]) -> Result<f64> {
    let mut total = 0.0;
    for w in pts.windows(2) {
        let d = &w[1] - &w[0];
        for (tau, weight) in GL2 {
            let q = &w[0] + &d * tau;
            total += weight * patch.field_values(q.as_slice())?.finsler(d.as_slice(), Variant::Forward);
        }
    }
    Ok(total)
}

// Length and its gradient with respect to every node.
fn length_gradient(patch: &ManifoldPatch, pts: &[DVector<f64>]) -> Result<(f64, Vec<DVector<f64>>)> {
    let n = pts[0].len();
    let mut grad = vec![DVector::zeros(n); pts.len()];
    let mut total = 0.0;
    for k in 0..pts.len() - 1 {
        let d = &pts[k + 1] - &pts[k];
        if d.iter().all(|&c| c == 0.0) {
            continue;
        }
        for (tau, weight) in GL2 {
            let q = &pts[k] + &d * tau;
            let (f, fx, fy) = patch.fields(q.as_slice())?.gradient_f(d.as_slice(), Variant::Forward);
            total += weight * f;
            grad[k] += (&fx * (1.0 - tau) - &fy) * weight;
            grad[k + 1] += (&fx * tau + &fy) * weight;
        }
    }
    Ok((total, grad))
}

// Solves tridiag(−1, 2, −1) z = r in place (Thomas algorithm).
fn solve_second_difference(r: &mut [f64]) {
    let m = r.len();
    let mut c = vec![0.0; m];
    let mut beta = 2.0;
    c[0] = -1.0 / beta;
    r[0] /= beta;
    for i in 1..m {
        beta = 2.0 + c[i - 1];
        c[i] = -1.0 / beta;
        r[i] = (r[i] + r[i - 1]) / beta;
    }
    for i in (0..m - 1).rev() {
        r[i] -= c[i] * r[i + 1];
    }
}

// Gradient descent on the interior nodes, preconditioned by the second
// difference operator (the Hessian of Euclidean length across a straight
// chain), with Armijo backtracking.
fn descend(
    patch: &ManifoldPatch,
    x: &[f64],
    y: &[f64],
    opts: &DistanceOptions,
) -> Result<(Vec<DVector<f64>>, f64, bool, usize)> {
    let n = patch.dim();
    let m = opts.nodes - 1;
    let (a, b) = (DVector::from_column_slice(x), DVector::from_column_slice(y));
    let mut pts: Vec<DVector<f64>> = (0..=m).map(|k| &a + (&b - &a) * (k as f64 / m as f64)).collect();
    let h = (&b - &a).norm() / m as f64;
    let mut step = 1.0f64;
    let (mut len, _) = length_gradient(patch, &pts)?;
    for iter in 0..opts.max_iters {
        let (_, grad) = length_gradient(patch, &pts)?;
        let mut dir = DMatrix::zeros(m - 1, n);
        for c in 0..n {
            let mut col: Vec<f64> = (1..m).map(|k| grad[k][c]).collect();
            solve_second_difference(&mut col);
            for (k, v) in col.into_iter().enumerate() {
                dir[(k, c)] = v * h;
            }
        }
        let slope: f64 = (1..m).map(|k| (0..n).map(|c| grad[k][c] * dir[(k - 1, c)]).sum::<f64>()).sum();
        if !(slope > 0.0) {
            return Ok((pts, len, true, iter));
        }
        let mut s = (2.0 * step).min(1e3);
        let mut accepted = None;
        while s > 1e-14 {
            let trial: Vec<DVector<f64>> = pts
                .iter()
                .enumerate()
                .map(|(k, p)| if k == 0 || k == m { p.clone() } else { p - dir.row(k - 1).transpose() * s })
                .collect();
            if trial.iter().all(|p| patch.contains(p.as_slice())) {
                let l = length(patch, &trial)?;
                if l <= len - 1e-4 * s * slope {
                    accepted = Some((trial, l));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((trial, l)) = accepted else {
            return Ok((pts, len, true, iter));
        };
        let improvement = (len - l) / l;
        pts = trial;
        len = l;
        step = s;
        if improvement < opts.rel_tol {
            return Ok((pts, len, true, iter + 1));
        }
    }
    Ok((pts, len, false, opts.max_iters))
}

fn endpoint(patch: &ManifoldPatch, x: &[f64], v: &[f64], steps: usize) -> Result<Option<GeodesicPath>> {
    match integrate_geodesic(patch, x, v, 1.0, steps) {
        Ok(p) if !p.truncated => Ok(Some(p)),
        Ok(_) | Err(Error::ZeroDirection) | Err(Error::SingularTensor { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

// Damped Newton on the initial velocity so that the unit-time geodesic ends at `y`.
fn shoot(patch: &ManifoldPatch, x: &[f64], y: &[f64], mut v: Vec<f64>, steps: usize) -> Result<Option<GeodesicPath>> {
    let n = x.len();
    let scale = 1.0 + y.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let residual = |p: &GeodesicPath| -> DVector<f64> {
        DVector::from_iterator(n, p.end().x.iter().zip(y).map(|(a, b)| a - b))
    };
    let Some(mut path) = endpoint(patch, x, &v, steps)? else {
        return Ok(None);
    };
    let mut r = residual(&path);
    for _ in 0..30 {
        if r.amax() <= 1e-11 * scale {
            return Ok(Some(path));
        }
        let vmax = v.iter().map(|c| c.abs()).fold(0.0, f64::max);
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let h = 1e-7 * vmax.max(1.0);
            let mut vj = v.clone();
            vj[j] += h;
            let Some(pj) = endpoint(patch, x, &vj, steps)? else {
                return Ok(None);
            };
            jac.set_column(j, &((residual(&pj) - &r) / h));
        }
        let Some(delta) = jac.lu().solve(&(-&r)) else {
            return Ok(None);
        };
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..10 {
            let trial: Vec<f64> = v.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Some(p) = endpoint(patch, x, &trial, steps)? {
                let rt = residual(&p);
                if rt.norm() < r.norm() {
                    v = trial;
                    path = p;
                    r = rt;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            return Ok(None);
        }
    }
    Ok((r.amax() <= 1e-11 * scale).then_some(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(b: [&str; 2]) -> ManifoldPatch {
        ManifoldPatch::from_sources("t", vec![[-4.0, 4.0]; 2], &["1", "0", "0", "1"], &b).unwrap()
    }

    #[test]
    fn thomas_solver() {
        let mut r = vec![1.0, 0.0, 0.0, 1.0];
        solve_second_difference(&mut r);
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn straight_line_distances() {
        let p = euclid(["0", "0"]);
        let d = distance(&p, &[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!(d.converged && (d.value - 5.0).abs() < 1e-9, "{d:?}");
        let e = euclid(["0.2", "0"]);
        let fwd = distance(&e, &[0.0, 0.0], &[1.0, 0.0]).unwrap().value;
        let bwd = distance(&e, &[1.0, 0.0], &[0.0, 0.0]).unwrap().value;
        let exact = (1.0f64 + 0.2f64.powi(4)).powf(0.25);
        assert!((fwd - (exact + 0.2)).abs() < 1e-9 && (bwd - (exact - 0.2)).abs() < 1e-9);
        assert!((fwd - 1.200400).abs() < 1e-6 && (bwd - 0.800400).abs() < 1e-6);
        let zero = distance(&e, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn conformal_distance_beats_the_chord() {
        let p = ManifoldPatch::from_sources("c", vec![[-4.0, 4.0]; 2], &["exp(0.2*x1)", "0", "0", "exp(0.2*x1)"], &["0", "0"])
            .unwrap();
        let (x, y) = ([-1.0, -1.0], [1.5, 2.0]);
        let d = distance(&p, &x, &y).unwrap();
        let chord = polyline_length(&p, &[x.to_vec(), y.to_vec()]).unwrap();
        assert!(d.converged && d.value < chord - 1e-4);
        assert!(d.value <= d.descent_value + 1e-12);
        assert_eq!(d.method, DistanceMethod::Shooting);
        // geodesic endpoint hits the target
        let end = &d.path.points()[d.path.points().len() - 1];
        assert!((end[0] - y[0]).abs() < 1e-9 && (end[1] - y[1]).abs() < 1e-9);
        // the polyline error is O(h²): finer polylines close the gap from above
        let fine = distance_with(&p, &x, &y, &DistanceOptions { nodes: 129, shooting_steps: 0, ..Default::default() })
            .unwrap()
            .value;
        assert!(d.descent_value > fine && fine > d.value);
        assert!((fine - d.value) < 0.1 * (d.descent_value - d.value));
    }

    #[test]
    fn polyline_csv_layout() {
        let p = euclid(["0", "0"]);
        let opts = DistanceOptions { shooting_steps: 0, ..Default::default() };
        let d = distance_with(&p, &[0.0, 0.0], &[1.0, 0.0], &opts).unwrap();
        let csv = d.to_csv(&p).unwrap();
        assert!(csv.starts_with("t,x1,x2,y1,y2,speed\n"));
        assert_eq!(csv.lines().count(), 34);
    }
}
