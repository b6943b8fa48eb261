//! Exterior derivative, line integrals and potentials of the 1-form `β = b_i dxⁱ`.

use nalgebra::DMatrix;

use crate::dual::{seed_axes, Dual, Scalar};
use crate::error::{Error, Result};
use crate::metric::ManifoldPatch;
use crate::quadrature::GL2;
use crate::report::{CheckReport, Detail};

/// Threshold on `max |ω_ij|` for calling `β` closed.
pub const CLOSEDNESS_THRESHOLD: f64 = 1e-10;

/// `ω_ij = ∂b_i/∂xʲ − ∂b_j/∂xⁱ` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFormValue {
    pub omega: DMatrix<f64>,
}

impl TwoFormValue {
    pub fn max_abs(&self) -> f64 {
        self.omega.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `ω_ij yʲ`
    pub fn contract(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        (0..n).map(|i| (0..n).map(|j| self.omega[(i, j)] * y[j]).sum()).collect()
    }
}

pub fn exterior_derivative(patch: &ManifoldPatch, x: &[f64]) -> Result<TwoFormValue> {
    let n = patch.dim();
    if x.len() != n {
        return Err(Error::Dimension { expected: n, got: x.len() });
    }
    // grads[i][j] = ∂b_i/∂xʲ
    let grads = patch.b_exprs().iter().map(|e| e.eval_grad(x).map(|(_, g)| g)).collect::<Result<Vec<_>, _>>()?;
    let mut omega = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let w = grads[i][j] - grads[j][i];
            omega[(i, j)] = w;
            omega[(j, i)] = -w;
        }
    }
    Ok(TwoFormValue { omega })
}

/// Scans `max |ω_ij|` over a tensor grid of the domain.
pub fn closedness_report(patch: &ManifoldPatch, grid_per_axis: usize) -> Result<CheckReport> {
    if grid_per_axis < 2 {
        return Err(Error::Invalid(format!("grid_per_axis must be at least 2, got {grid_per_axis}")));
    }
    let grid = patch.grid(grid_per_axis);
    let mut max = 0.0f64;
    let mut worst = patch.center();
    for x in &grid {
        let m = exterior_derivative(patch, x)?.max_abs();
        if m > max || m.is_nan() {
            max = m;
            worst.clone_from(x);
        }
    }
    let mut report = CheckReport::below("closedness", grid.len(), max, CLOSEDNESS_THRESHOLD);
    report.pass = max <= CLOSEDNESS_THRESHOLD;
    let mut worst_detail = Detail::value("max_abs_d_beta", max);
    worst_detail.note = Some(format!("attained at {worst:?}"));
    Ok(report.with_detail(worst_detail))
}

/// Closedness on the default 9-per-axis scan grid.
pub fn is_closed(patch: &ManifoldPatch) -> Result<bool> {
    Ok(closedness_report(patch, 9)?.pass)
}

/// `∫ b_i dxⁱ` along a polyline, 2-point Gauss–Legendre per segment.
pub fn line_integral(patch: &ManifoldPatch, path: &[Vec<f64>]) -> Result<f64> {
    line_integral_generic(patch, path)
}

pub fn line_integral_generic<T: Scalar>(patch: &ManifoldPatch, path: &[Vec<T>]) -> Result<T> {
    let n = patch.dim();
    if let Some(bad) = path.iter().find(|p| p.len() != n) {
        return Err(Error::Dimension { expected: n, got: bad.len() });
    }
    let mut total = T::cst(0.0);
    for seg in path.windows(2) {
        let (p, q) = (&seg[0], &seg[1]);
        let d: Vec<T> = q.iter().zip(p).map(|(&a, &b)| a - b).collect();
        for (tau, w) in GL2 {
            let x: Vec<T> = p.iter().zip(&d).map(|(&pi, &di)| pi + di.scale(tau)).collect();
            total = total + patch.beta_generic(&x, &d)?.scale(w);
        }
    }
    Ok(total)
}

/// Antiderivative of a closed `β` on a box patch, integrated along straight
/// segments from a base point.
#[derive(Debug, Clone)]
pub struct Potential<'a> {
    patch: &'a ManifoldPatch,
    base: Vec<f64>,
    subdivisions: usize,
}

impl<'a> Potential<'a> {
    /// Fails with [`Error::NotClosed`] unless the closedness scan passes.
    pub fn new(patch: &'a ManifoldPatch, base: &[f64]) -> Result<Self> {
        if base.len() != patch.dim() {
            return Err(Error::Dimension { expected: patch.dim(), got: base.len() });
        }
        let report = closedness_report(patch, 9)?;
        if !report.pass {
            return Err(Error::NotClosed { patch: patch.name().to_string(), max_residual: report.max_residual });
        }
        Ok(Potential { patch, base: base.to_vec(), subdivisions: 16 })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    fn value_generic<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let m = self.subdivisions;
        let path: Vec<Vec<T>> = (0..=m)
            .map(|k| {
                let s = k as f64 / m as f64;
                self.base.iter().zip(x).map(|(&b, &xi)| T::cst(b * (1.0 - s)) + xi.scale(s)).collect()
            })
            .collect();
        line_integral_generic(self.patch, &path)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.value_generic(x)
    }

    /// Exact gradient of the quadrature formula by dual numbers.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..x.len())
            .map(|i| {
                let v: Vec<Dual<f64>> = seed_axes(x, &[i]);
                Ok(self.value_generic(&v)?.du)
            })
            .collect()
    }
}

pub fn potential_from_closed(patch: &ManifoldPatch, base: &[f64], x: &[f64]) -> Result<f64> {
    Potential::new(patch, base)?.value(x)
}
