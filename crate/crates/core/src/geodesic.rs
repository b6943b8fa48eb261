//! Spray coefficients, geodesic integration and reversibility checks.
//!
//! Geodesics solve `ẍⁱ + 2Gⁱ(x, ẋ) = 0` with `Gⁱ = ½ Γⁱ_jk yʲ yᵏ`, where `Γ`
//! are the Christoffel symbols built from the direction-dependent tensor
//! `g_ij(x, y)`. The same `G` is also computed from
//! `Gⁱ = ¼ gⁱˡ (yᵏ ∂²F²/∂yˡ∂xᵏ − ∂F²/∂xˡ)`; the two routes share no code below
//! the expression evaluator.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::dual::{seed_axes, top_mask, Dual3, Scalar};
use crate::error::{Error, Result};
use crate::forms::exterior_derivative;
use crate::metric::{DirectionPoint, ManifoldPatch, Variant};
use crate::report::{max_abs, CheckReport, Detail};

/// Default integrator resolution.
pub const STEPS_PER_UNIT_TIME: usize = 512;

/// Threshold on the trace Hausdorff defect for calling geodesics reversible.
pub const REVERSIBLE_DEFECT_THRESHOLD: f64 = 1e-4;

/// `Gⁱ(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayCoefficients {
    pub g: Vec<f64>,
}

/// `Γⁱ_jk(x, y)` stored as `[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Christoffel { n, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    /// `½ Γⁱ_jk yʲ yᵏ`
    pub fn contract_half(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        s += self.get(i, j, k) * y[j] * y[k];
                    }
                }
                0.5 * s
            })
            .collect()
    }
}

fn singular(dp: &DirectionPoint) -> Error {
    Error::SingularTensor { x: dp.x.clone(), y: dp.y.clone() }
}

fn solve(g: DMatrix<f64>, rhs: DVector<f64>, dp: &DirectionPoint) -> Result<DVector<f64>> {
    g.lu().solve(&rhs).filter(|v| v.iter().all(|c| c.is_finite())).ok_or_else(|| singular(dp))
}

/// Formal Christoffel symbols of the forward metric.
pub fn formal_christoffel(patch: &ManifoldPatch, dp: &DirectionPoint) -> Result<Christoffel> {
    formal_christoffel_of(patch, dp, Variant::Forward)
}

/// `Γⁱ_jk = ½ gⁱˢ (∂g_sj/∂xᵏ + ∂g_sk/∂xʲ − ∂g_jk/∂xˢ)` with `∂g/∂x` taken as a
/// third-order dual derivative of `F²`; `gⁱˢ` is applied by linear solves.
pub fn formal_christoffel_of(patch: &ManifoldPatch, dp: &DirectionPoint, variant: Variant) -> Result<Christoffel> {
    let n = patch.dim();
    let g = patch.fundamental_tensor_of(dp, variant)?.g;
    let point: Vec<f64> = dp.x.iter().chain(&dp.y).copied().collect();
    // dg[k][(s, j)] = ∂g_sj/∂xᵏ
    let mut dg = vec![DMatrix::<f64>::zeros(n, n); n];
    for (k, dgk) in dg.iter_mut().enumerate() {
        for s in 0..n {
            for j in s..n {
                let v: Vec<Dual3> = seed_axes(&point, &[k, n + s, n + j]);
                let f = patch.finsler_generic(&v[..n], &v[n..], variant)?;
                let d = 0.5 * (f * f).component(top_mask(3));
                dgk[(s, j)] = d;
                dgk[(j, s)] = d;
            }
        }
    }
    let lu = g.lu();
    let mut gamma = Christoffel::zeros(n);
    for j in 0..n {
        for k in j..n {
            let rhs = DVector::from_fn(n, |s, _| 0.5 * (dg[k][(s, j)] + dg[j][(s, k)] - dg[s][(j, k)]));
            let col = lu.solve(&rhs).filter(|v| v.iter().all(|c| c.is_finite())).ok_or_else(|| singular(dp))?;
            for i in 0..n {
                gamma.set(i, j, k, col[i]);
                gamma.set(i, k, j, col[i]);
            }
        }
    }
    Ok(gamma)
}

/// Spray of the forward metric.
pub fn spray_coefficients(patch: &ManifoldPatch, dp: &DirectionPoint) -> Result<SprayCoefficients> {
    spray_of(patch, dp, Variant::Forward)
}

/// Spray of `F(x, −y)`.
pub fn reverse_spray(patch: &ManifoldPatch, dp: &DirectionPoint) -> Result<SprayCoefficients> {
    spray_of(patch, dp, Variant::Reverse)
}

/// `Gⁱ = ¼ gⁱˡ (yᵏ ∂²F²/∂yˡ∂xᵏ − ∂F²/∂xˡ)`.
pub fn spray_of(patch: &ManifoldPatch, dp: &DirectionPoint, variant: Variant) -> Result<SprayCoefficients> {
    dp.check(patch.dim())?;
    let fields = patch.fields(&dp.x)?;
    let jet = fields.jet_f2(&dp.y, variant)?;
    let y = DVector::from_column_slice(&dp.y);
    let rhs = (&jet.dyx * &y - &jet.dx) * 0.25;
    let g = jet.dyy * 0.5;
    Ok(SprayCoefficients { g: solve(g, rhs, dp)?.iter().copied().collect() })
}

/// `Gⁱ = ½ Γⁱ_jk yʲ yᵏ` from the formal Christoffel symbols.
pub fn spray_from_christoffel(patch: &ManifoldPatch, dp: &DirectionPoint, variant: Variant) -> Result<SprayCoefficients> {
    Ok(SprayCoefficients { g: formal_christoffel_of(patch, dp, variant)?.contract_half(&dp.y) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathNode {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Finslerian speed `F(x, y)` of the integrated metric.
    pub speed: f64,
}

/// A discretized geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub nodes: Vec<PathNode>,
    pub step: f64,
    pub variant: Variant,
    /// The trajectory left the domain box and was cut at the last inside node.
    pub truncated: bool,
}

impl GeodesicPath {
    pub fn positions(&self) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|n| n.x.clone()).collect()
    }

    pub fn end(&self) -> &PathNode {
        self.nodes.last().expect("paths hold at least the initial node")
    }

    /// Largest relative deviation of the speed from its initial value.
    pub fn speed_drift(&self) -> f64 {
        let s0 = self.nodes[0].speed;
        self.nodes.iter().map(|n| ((n.speed - s0) / s0).abs()).fold(0.0, f64::max)
    }

    /// Length `∫ F dt` by the trapezoid rule over the nodes.
    pub fn length(&self) -> f64 {
        self.nodes.windows(2).map(|w| 0.5 * (w[0].speed + w[1].speed) * (w[1].t - w[0].t)).sum()
    }

    /// CSV with columns `t, x1..xn, y1..yn, speed`.
    pub fn to_csv(&self) -> String {
        let n = self.nodes.first().map_or(0, |p| p.x.len());
        let mut out = String::from("t");
        for i in 1..=n {
            write!(out, ",x{i}").unwrap();
        }
        for i in 1..=n {
            write!(out, ",y{i}").unwrap();
        }
        out.push_str(",speed\n");
        for node in &self.nodes {
            write!(out, "{}", node.t).unwrap();
            for v in node.x.iter().chain(&node.y) {
                write!(out, ",{v}").unwrap();
            }
            writeln!(out, ",{}", node.speed).unwrap();
        }
        out
    }
}

/// `(t, x, y)` samples of an integrated curve.
pub type Trajectory = Vec<(f64, Vec<f64>, Vec<f64>)>;

/// Classical RK4 on `ẋ = y, ẏ = accel(x, y)`; stops early (returning `true`)
/// when `inside` rejects a new state.
pub fn rk4<A, I>(x0: &[f64], y0: &[f64], t_end: f64, steps: usize, mut accel: A, inside: I) -> Result<(Trajectory, bool)>
where
    A: FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
    I: Fn(&[f64]) -> bool,
{
    let h = t_end / steps as f64;
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + s * q).collect() };
    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut y) = (x0.to_vec(), y0.to_vec());
    out.push((0.0, x.clone(), y.clone()));
    for k in 0..steps {
        let k1x = y.clone();
        let k1y = accel(&x, &y)?;
        let (x2, y2) = (axpy(&x, 0.5 * h, &k1x), axpy(&y, 0.5 * h, &k1y));
        let k2y = accel(&x2, &y2)?;
        let (x3, y3) = (axpy(&x, 0.5 * h, &y2), axpy(&y, 0.5 * h, &k2y));
        let k3y = accel(&x3, &y3)?;
        let (x4, y4) = (axpy(&x, h, &y3), axpy(&y, h, &k3y));
        let k4y = accel(&x4, &y4)?;
        let nx: Vec<f64> =
            (0..x.len()).map(|i| x[i] + h / 6.0 * (k1x[i] + 2.0 * y2[i] + 2.0 * y3[i] + y4[i])).collect();
        let ny: Vec<f64> =
            (0..y.len()).map(|i| y[i] + h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i])).collect();
        if !inside(&nx) {
            return Ok((out, true));
        }
        x = nx;
        y = ny;
        out.push(((k + 1) as f64 * h, x.clone(), y.clone()));
    }
    Ok((out, false))
}

/// Geodesic of the forward metric.
pub fn integrate_geodesic(patch: &ManifoldPatch, x0: &[f64], y0: &[f64], t_end: f64, steps: usize) -> Result<GeodesicPath> {
    integrate_geodesic_of(patch, Variant::Forward, x0, y0, t_end, steps)
}

pub fn integrate_geodesic_of(
    patch: &ManifoldPatch,
    variant: Variant,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<GeodesicPath> {
    DirectionPoint::new(x0, y0).check(patch.dim())?;
    if steps == 0 || !(t_end > 0.0) {
        return Err(Error::Invalid(format!("need steps > 0 and t_end > 0, got {steps}, {t_end}")));
    }
    if !patch.contains(x0) {
        return Err(Error::OutsideDomain { x: x0.to_vec() });
    }
    let accel = |x: &[f64], y: &[f64]| -> Result<Vec<f64>> {
        let g = spray_of(patch, &DirectionPoint::new(x, y), variant)?;
        Ok(g.g.iter().map(|v| -2.0 * v).collect())
    };
    let (states, truncated) = rk4(x0, y0, t_end, steps, accel, |x| patch.contains(x))?;
    let nodes = states
        .into_iter()
        .map(|(t, x, y)| {
            let speed = patch.finsler(&DirectionPoint::new(x.clone(), y.clone()), variant)?;
            Ok(PathNode { t, x, y, speed })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeodesicPath { nodes, step: t_end / steps as f64, variant, truncated })
}

/// `Γ̃(∂F/∂yⁱ) − ∂F/∂xⁱ`, where `Γ̃ = yᵏ∂/∂xᵏ − 2G̃ᵏ∂/∂yᵏ` differentiates
/// along integral curves of the reverse spray.
pub fn el_reversibility_residual(patch: &ManifoldPatch, dp: &DirectionPoint) -> Result<Vec<f64>> {
    let jet = patch.fields(&dp.x)?.jet_f(&dp.y, Variant::Forward)?;
    let g_rev = DVector::from_column_slice(&reverse_spray(patch, dp)?.g);
    let y = DVector::from_column_slice(&dp.y);
    let r = &jet.dyx * &y - (&jet.dyy * &g_rev) * 2.0 - &jet.dx;
    Ok(r.iter().copied().collect())
}

/// `F_β · (∂b_i/∂xʲ − ∂b_j/∂xⁱ) yʲ` with `F_β = 1 + β³/(α⁴+β⁴)^{3/4}`.
pub fn closed_form_criterion(patch: &ManifoldPatch, dp: &DirectionPoint) -> Result<Vec<f64>> {
    dp.check(patch.dim())?;
    let factor = patch.f_beta(dp)?;
    debug_assert!(factor > 0.0);
    let omega = exterior_derivative(patch, &dp.x)?;
    Ok(omega.contract(&dp.y).into_iter().map(|v| factor * v).collect())
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = b.iter().zip(a).map(|(u, v)| u - v).collect();
    let dd: f64 = d.iter().map(|v| v * v).sum();
    let t = if dd == 0.0 {
        0.0
    } else {
        (p.iter().zip(a).zip(&d).map(|((pi, ai), di)| (pi - ai) * di).sum::<f64>() / dd).clamp(0.0, 1.0)
    };
    p.iter().zip(a).zip(&d).map(|((pi, ai), di)| (pi - ai - t * di).powi(2)).sum::<f64>().sqrt()
}

fn point_polyline_distance(p: &[f64], line: &[Vec<f64>]) -> f64 {
    if line.len() == 1 {
        return point_segment_distance(p, &line[0], &line[0]);
    }
    line.windows(2).map(|w| point_segment_distance(p, &w[0], &w[1])).fold(f64::INFINITY, f64::min)
}

/// Symmetric Hausdorff distance between two polylines, measured from the
/// nodes of each to the segments of the other.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one = |p: &[Vec<f64>], q: &[Vec<f64>]| p.iter().map(|x| point_polyline_distance(x, q)).fold(0.0, f64::max);
    one(a, b).max(one(b, a))
}

/// Cuts `line` at the point closest to `target`, replacing the tail by the
/// foot point on the nearest segment.
fn clip_at_closest(line: &[Vec<f64>], target: &[f64]) -> Vec<Vec<f64>> {
    let mut best = (f64::INFINITY, 0usize, line[0].clone());
    for (k, w) in line.windows(2).enumerate() {
        let d: Vec<f64> = w[1].iter().zip(&w[0]).map(|(u, v)| u - v).collect();
        let dd: f64 = d.iter().map(|v| v * v).sum();
        let t = if dd == 0.0 {
            0.0
        } else {
            (target.iter().zip(&w[0]).zip(&d).map(|((p, a), di)| (p - a) * di).sum::<f64>() / dd).clamp(0.0, 1.0)
        };
        let foot: Vec<f64> = w[0].iter().zip(&d).map(|(a, di)| a + t * di).collect();
        let dist: f64 = foot.iter().zip(target).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        if dist < best.0 {
            best = (dist, k, foot);
        }
    }
    let mut out = line[..=best.1].to_vec();
    out.push(best.2);
    out
}

/// Trace defect for one starting direction: integrate γ at unit speed, then
/// integrate the geodesic leaving γ's endpoint along `−γ̇` at unit speed, clip
/// it where it comes closest to γ(0), and compare the two point sets. The
/// reverse leg runs for 1.25 times the reverse length `∫F(γ, −γ̇)` of γ, at
/// the same step size.
pub fn reversal_defect(patch: &ManifoldPatch, start: &DirectionPoint, t_end: f64, steps: usize) -> Result<f64> {
    let speed = patch.f_value(start)?;
    let y0: Vec<f64> = start.y.iter().map(|v| v / speed).collect();
    let forward = integrate_geodesic(patch, &start.x, &y0, t_end, steps)?;
    if forward.truncated {
        return Err(Error::OutsideDomain { x: forward.end().x.clone() });
    }
    let reverse_speeds = forward
        .nodes
        .iter()
        .map(|n| patch.f_reverse(&DirectionPoint::new(n.x.clone(), n.y.clone())))
        .collect::<Result<Vec<_>>>()?;
    let reverse_length: f64 = reverse_speeds.windows(2).map(|w| 0.5 * (w[0] + w[1]) * forward.step).sum();
    let t_back = 1.25 * reverse_length;
    let end = forward.end();
    let back = DirectionPoint::new(end.x.clone(), end.y.iter().map(|v| -v).collect::<Vec<_>>());
    let back_speed = patch.f_value(&back)?;
    let v0: Vec<f64> = back.y.iter().map(|v| v / back_speed).collect();
    let back_steps = ((t_back / forward.step).ceil() as usize).max(1);
    let reverse = integrate_geodesic(patch, &back.x, &v0, t_back, back_steps)?;
    let forward_trace = forward.positions();
    let reverse_trace = clip_at_closest(&reverse.positions(), &start.x);
    Ok(hausdorff(&forward_trace, &reverse_trace))
}

/// Maximum reversal defect over `samples`; passes below
/// [`REVERSIBLE_DEFECT_THRESHOLD`].
pub fn trace_reversibility_defect(
    patch: &ManifoldPatch,
    samples: &[DirectionPoint],
    t_end: f64,
    steps: usize,
) -> Result<CheckReport> {
    let mut max = 0.0f64;
    let mut details = Vec::with_capacity(samples.len());
    for (k, s) in samples.iter().enumerate() {
        let d = reversal_defect(patch, s, t_end, steps)?;
        max = max_abs(max, d);
        details.push(Detail::value(format!("sample_{k}"), d));
    }
    let mut report = CheckReport::below("trace_reversibility", samples.len(), max, REVERSIBLE_DEFECT_THRESHOLD);
    report.details = details;
    Ok(report)
}
