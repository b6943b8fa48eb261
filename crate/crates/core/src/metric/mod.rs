//! The metric `F = (α⁴ + β⁴)^{1/4} + β` on a coordinate patch.
//!
//! `α = √(a_ij(x) yⁱ yʲ)` is Riemannian and `β = b_i(x) yⁱ` is a 1-form. The
//! same formula with `-β` is the reverse metric `F(x, -y)`, and dropping `β`
//! from the sum leaves the absolutely homogeneous quartic metric. All three
//! are selected through [`Variant`].
//!
//! Two evaluation routes exist. The generic route evaluates the full metric
//! over nested dual numbers and is used where third derivatives are needed
//! or as an independent check. The [`local`] route differentiates the
//! coefficient fields once and composes the `(α², β)` dependence
//! analytically; it is what the integrators call in their inner loops.

pub mod local;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dual::{seed_axes, top_mask, Dual2, Scalar};
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;

pub use local::{FieldJet, LocalJet};

/// Which member of the metric family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `(α⁴+β⁴)^{1/4} + β`
    Forward,
    /// `(α⁴+β⁴)^{1/4} − β`, i.e. `F(x, −y)`
    Reverse,
    /// `(α⁴+β⁴)^{1/4}`
    Quartic,
}

impl Variant {
    pub fn sigma(self) -> f64 {
        match self {
            Variant::Forward => 1.0,
            Variant::Reverse => -1.0,
            Variant::Quartic => 0.0,
        }
    }
}

/// `F` as a function of `A = α²` and `β`.
pub fn finsler_from_ab<T: Scalar>(alpha_sq: T, beta: T, sigma: f64) -> T {
    let b2 = beta * beta;
    (alpha_sq * alpha_sq + b2 * b2).powf(0.25) + beta.scale(sigma)
}

/// `F²` as a function of `A = α²` and `β`.
pub fn finsler_sq_from_ab<T: Scalar>(alpha_sq: T, beta: T, sigma: f64) -> T {
    let f = finsler_from_ab(alpha_sq, beta, sigma);
    f * f
}

/// A base point and a tangent vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl DirectionPoint {
    pub fn new(x: impl Into<Vec<f64>>, y: impl Into<Vec<f64>>) -> Self {
        DirectionPoint { x: x.into(), y: y.into() }
    }

    pub fn reversed(&self) -> Self {
        DirectionPoint { x: self.x.clone(), y: self.y.iter().map(|v| -v).collect() }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        DirectionPoint { x: self.x.clone(), y: self.y.iter().map(|v| lambda * v).collect() }
    }

    pub(crate) fn check(&self, n: usize) -> Result<()> {
        for len in [self.x.len(), self.y.len()] {
            if len != n {
                return Err(Error::Dimension { expected: n, got: len });
            }
        }
        if self.y.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroDirection);
        }
        Ok(())
    }
}

/// `g_ij(x, y) = ½ ∂²(F²)/∂yⁱ∂yʲ` at a direction point.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTensor {
    pub g: DMatrix<f64>,
    pub at: DirectionPoint,
}

impl FundamentalTensor {
    /// `g_ij yⁱ yʲ`, which equals `F²` by homogeneity.
    pub fn quadratic_form(&self) -> f64 {
        let y = &self.at.y;
        let n = y.len();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| self.g[(i, j)] * y[i] * y[j]).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.g.clone()).eigenvalues.min()
    }
}

/// A coordinate patch carrying the `(α, β)` data.
#[derive(Debug, Clone)]
pub struct ManifoldPatch {
    name: String,
    domain: Vec<[f64; 2]>,
    // row-major n×n
    a: Vec<ScalarExpr>,
    b: Vec<ScalarExpr>,
}

impl ManifoldPatch {
    /// Validates shapes, structural symmetry of `a`, and positive
    /// definiteness of `a(x)` on a sample grid of the domain box.
    pub fn new(name: impl Into<String>, domain: Vec<[f64; 2]>, a: Vec<ScalarExpr>, b: Vec<ScalarExpr>) -> Result<Self> {
        let n = domain.len();
        if n < 2 {
            return Err(Error::Invalid(format!("patch dimension must be at least 2, got {n}")));
        }
        if a.len() != n * n {
            return Err(Error::Dimension { expected: n * n, got: a.len() });
        }
        if b.len() != n {
            return Err(Error::Dimension { expected: n, got: b.len() });
        }
        for e in a.iter().chain(&b) {
            if e.arity() != n {
                return Err(Error::Dimension { expected: n, got: e.arity() });
            }
        }
        for (k, [lo, hi]) in domain.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Invalid(format!("domain axis {} is unbounded: [{lo}, {hi}]", k + 1)));
            }
            if !(lo < hi) {
                return Err(Error::Invalid(format!("domain axis {} is empty: [{lo}, {hi}]", k + 1)));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if a[i * n + j] != a[j * n + i] {
                    return Err(Error::NotSymmetric { i: i + 1, j: j + 1 });
                }
            }
        }
        let patch = ManifoldPatch { name: name.into(), domain, a, b };
        for x in patch.grid(4) {
            patch.a_at(&x)?;
            patch.b_at(&x)?;
        }
        Ok(patch)
    }

    /// Convenience constructor from expression sources.
    pub fn from_sources(name: &str, domain: Vec<[f64; 2]>, a: &[&str], b: &[&str]) -> Result<Self> {
        let n = domain.len();
        let a = a.iter().map(|s| ScalarExpr::parse(s, n)).collect::<Result<Vec<_>, _>>()?;
        let b = b.iter().map(|s| ScalarExpr::parse(s, n)).collect::<Result<Vec<_>, _>>()?;
        Self::new(name, domain, a, b)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[[f64; 2]] {
        &self.domain
    }

    pub fn a_exprs(&self) -> &[ScalarExpr] {
        &self.a
    }

    pub fn b_exprs(&self) -> &[ScalarExpr] {
        &self.b
    }

    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.domain).all(|(v, [lo, hi])| *v >= *lo && *v <= *hi)
    }

    /// Tensor grid with `per_axis` points along every axis, corners included.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(2);
        let n = self.dim();
        let total = per_axis.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                (0..n)
                    .map(|k| {
                        let i = idx % per_axis;
                        idx /= per_axis;
                        let [lo, hi] = self.domain[k];
                        lo + (hi - lo) * i as f64 / (per_axis - 1) as f64
                    })
                    .collect()
            })
            .collect()
    }

    /// The 1-form is identically zero (every `b_i` is the literal 0).
    pub fn b_vanishes(&self) -> bool {
        self.b.iter().all(|e| e.is_constant() && e.eval(&vec![0.0; self.dim()]).is_ok_and(|v| v == 0.0))
    }

    /// `a(x)`, checked for positive definiteness.
    pub fn a_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::Dimension { expected: n, got: x.len() });
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.a[i * n + j].eval(x)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        if m.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite { at: x.to_vec() });
        }
        Ok(m)
    }

    pub fn b_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::Dimension { expected: n, got: x.len() });
        }
        self.b.iter().map(|e| e.eval(x).map_err(Error::from)).collect()
    }

    pub fn alpha_sq_generic<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        let n = self.dim();
        let mut acc = T::cst(0.0);
        for i in 0..n {
            for j in i..n {
                let aij = self.a[i * n + j].eval_generic(x)?;
                let term = aij * y[i] * y[j];
                acc = acc + if i == j { term } else { term.scale(2.0) };
            }
        }
        Ok(acc)
    }

    pub fn beta_generic<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        let mut acc = T::cst(0.0);
        for (e, &yi) in self.b.iter().zip(y) {
            acc = acc + e.eval_generic(x)? * yi;
        }
        Ok(acc)
    }

    /// The metric over any scalar type; `x` and `y` may carry dual seeds.
    pub fn finsler_generic<T: Scalar>(&self, x: &[T], y: &[T], variant: Variant) -> Result<T> {
        let a2 = self.alpha_sq_generic(x, y)?;
        let b = self.beta_generic(x, y)?;
        Ok(finsler_from_ab(a2, b, variant.sigma()))
    }

    pub fn alpha(&self, dp: &DirectionPoint) -> Result<f64> {
        dp.check(self.dim())?;
        let a = self.a_at(&dp.x)?;
        let y = nalgebra::DVector::from_column_slice(&dp.y);
        Ok((y.dot(&(&a * &y))).sqrt())
    }

    pub fn beta(&self, dp: &DirectionPoint) -> Result<f64> {
        let n = self.dim();
        if dp.x.len() != n || dp.y.len() != n {
            return Err(Error::Dimension { expected: n, got: dp.x.len().min(dp.y.len()) });
        }
        self.beta_generic(&dp.x, &dp.y)
    }

    /// Evaluate the selected metric; a nonpositive value is an error.
    pub fn finsler(&self, dp: &DirectionPoint, variant: Variant) -> Result<f64> {
        let alpha = self.alpha(dp)?;
        let beta = self.beta_generic(&dp.x, &dp.y)?;
        let value = finsler_from_ab(alpha * alpha, beta, variant.sigma());
        if !(value > 0.0) {
            return Err(Error::MetricPositivity { value, x: dp.x.clone(), y: dp.y.clone() });
        }
        Ok(value)
    }

    pub fn f_value(&self, dp: &DirectionPoint) -> Result<f64> {
        self.finsler(dp, Variant::Forward)
    }

    /// `F(x, −y)`.
    pub fn f_reverse(&self, dp: &DirectionPoint) -> Result<f64> {
        self.finsler(dp, Variant::Reverse)
    }

    /// `F_β = ∂F/∂β = 1 + β³/(α⁴+β⁴)^{3/4}`.
    pub fn f_beta(&self, dp: &DirectionPoint) -> Result<f64> {
        let alpha = self.alpha(dp)?;
        let beta = self.beta_generic(&dp.x, &dp.y)?;
        let q = alpha.powi(4) + beta.powi(4);
        Ok(1.0 + beta.powi(3) / q.powf(0.75))
    }

    pub fn fundamental_tensor(&self, dp: &DirectionPoint) -> Result<FundamentalTensor> {
        self.fundamental_tensor_of(dp, Variant::Forward)
    }

    /// `g_ij` by one second-order dual evaluation of `F²` per unordered
    /// index pair of `y`.
    pub fn fundamental_tensor_of(&self, dp: &DirectionPoint, variant: Variant) -> Result<FundamentalTensor> {
        let n = self.dim();
        dp.check(n)?;
        self.a_at(&dp.x)?;
        let x: Vec<Dual2> = dp.x.iter().map(|&v| Dual2::cst(v)).collect();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let y: Vec<Dual2> = seed_axes(&dp.y, &[i, j]);
                let f = self.finsler_generic(&x, &y, variant)?;
                let v = 0.5 * (f * f).component(top_mask(2));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(FundamentalTensor { g, at: dp.clone() })
    }

    /// True iff the smallest eigenvalue of `g(x, y)` exceeds `tol`.
    pub fn check_strong_convexity(&self, dp: &DirectionPoint, tol: f64) -> Result<bool> {
        Ok(self.fundamental_tensor(dp)?.min_eigenvalue() > tol)
    }

    /// Coefficient fields and their first derivatives at `x`.
    pub fn fields(&self, x: &[f64]) -> Result<FieldJet> {
        FieldJet::new(self, x, true)
    }

    /// Coefficient field values only.
    pub fn field_values(&self, x: &[f64]) -> Result<FieldJet> {
        FieldJet::new(self, x, false)
    }
}
