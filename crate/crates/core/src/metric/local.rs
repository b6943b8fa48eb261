//! Derivatives of functions of `(α², β)` by analytic composition.
//!
//! `A = a_ij yⁱyʲ` and `B = b_i yⁱ` are polynomial in `y`, so their `y`
//! and mixed `x,y` derivatives follow directly from `a`, `b` and their first
//! `x`-derivatives. The outer function `h(A, B)` is differentiated with
//! second-order duals. Second `x`-derivatives are never formed here.

use nalgebra::{DMatrix, DVector};

use super::{finsler_from_ab, finsler_sq_from_ab, ManifoldPatch, Variant};
use crate::dual::{Dual, Dual2, Scalar};
use crate::error::{Error, Result};

/// `a(x)`, `b(x)` and optionally their first partials.
#[derive(Debug, Clone)]
pub struct FieldJet {
    pub x: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// `da[k] = ∂a/∂xᵏ`; empty when built without derivatives.
    pub da: Vec<DMatrix<f64>>,
    /// `db[k] = ∂b/∂xᵏ`; empty when built without derivatives.
    pub db: Vec<DVector<f64>>,
}

/// Value and the derivatives of a function of `(x, y)` that the spray,
/// Hamel and Euler–Lagrange computations use.
#[derive(Debug, Clone)]
pub struct LocalJet {
    pub value: f64,
    /// `∂/∂xᵏ`
    pub dx: DVector<f64>,
    /// `∂/∂yᵐ`
    pub dy: DVector<f64>,
    /// `∂²/∂yᵐ∂yˡ`
    pub dyy: DMatrix<f64>,
    /// `∂²/∂yᵐ∂xᵏ`, rows indexed by `m`, columns by `k`
    pub dyx: DMatrix<f64>,
}

// (h, h_A, h_B, h_AA, h_AB, h_BB)
struct OuterDerivs([f64; 6]);

fn outer(h: impl Fn(Dual2, Dual2) -> Dual2, a: f64, b: f64) -> OuterDerivs {
    let var = |v: f64, s: [f64; 2]| Dual2::seeded(v, &s);
    let aa = h(var(a, [1.0, 1.0]), var(b, [0.0, 0.0]));
    let ab = h(var(a, [1.0, 0.0]), var(b, [0.0, 1.0]));
    let bb = h(var(a, [0.0, 0.0]), var(b, [1.0, 1.0]));
    OuterDerivs([
        aa.component(0),
        aa.component(0b01),
        bb.component(0b01),
        aa.component(0b11),
        ab.component(0b11),
        bb.component(0b11),
    ])
}

impl FieldJet {
    pub(crate) fn new(patch: &ManifoldPatch, x: &[f64], derivs: bool) -> Result<Self> {
        let n = patch.dim();
        if x.len() != n {
            return Err(Error::Dimension { expected: n, got: x.len() });
        }
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        let (mut da, mut db) = if derivs {
            (vec![DMatrix::zeros(n, n); n], vec![DVector::zeros(n); n])
        } else {
            (Vec::new(), Vec::new())
        };
        let exprs = patch.a_exprs();
        for i in 0..n {
            for j in i..n {
                let e = &exprs[i * n + j];
                if derivs {
                    let (v, g) = e.eval_grad(x)?;
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                    for k in 0..n {
                        da[k][(i, j)] = g[k];
                        da[k][(j, i)] = g[k];
                    }
                } else {
                    let v = e.eval(x)?;
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
        }
        for (i, e) in patch.b_exprs().iter().enumerate() {
            if derivs {
                let (v, g) = e.eval_grad(x)?;
                b[i] = v;
                for k in 0..n {
                    db[k][i] = g[k];
                }
            } else {
                b[i] = e.eval(x)?;
            }
        }
        Ok(FieldJet { x: x.to_vec(), a, b, da, db })
    }

    pub fn has_derivatives(&self) -> bool {
        !self.da.is_empty()
    }

    fn ab(&self, y: &DVector<f64>) -> (f64, f64) {
        (y.dot(&(&self.a * y)), self.b.dot(y))
    }

    /// The metric value from field values alone.
    pub fn finsler(&self, y: &[f64], variant: Variant) -> f64 {
        let y = DVector::from_column_slice(y);
        let (a2, b) = self.ab(&y);
        finsler_from_ab(a2, b, variant.sigma())
    }

    /// Jet of `F`.
    pub fn jet_f(&self, y: &[f64], variant: Variant) -> Result<LocalJet> {
        let s = variant.sigma();
        self.compose(y, |a, b| finsler_from_ab(a, b, s))
    }

    /// Jet of `F²`.
    pub fn jet_f2(&self, y: &[f64], variant: Variant) -> Result<LocalJet> {
        let s = variant.sigma();
        self.compose(y, |a, b| finsler_sq_from_ab(a, b, s))
    }

    /// `(F, ∂F/∂x, ∂F/∂y)`, the first-order part only.
    pub fn gradient_f(&self, y: &[f64], variant: Variant) -> (f64, DVector<f64>, DVector<f64>) {
        assert!(self.has_derivatives(), "field jet was built without derivatives");
        let n = self.a.nrows();
        let y = DVector::from_column_slice(y);
        let ay = &self.a * &y;
        let (a2, beta) = (y.dot(&ay), self.b.dot(&y));
        let s = variant.sigma();
        let fa = finsler_from_ab(Dual::new(a2, 1.0), Dual::cst(beta), s);
        let fb = finsler_from_ab(Dual::cst(a2), Dual::new(beta, 1.0), s);
        let (ha, hb) = (fa.du, fb.du);
        let mut dx = DVector::zeros(n);
        for k in 0..n {
            dx[k] = ha * y.dot(&(&self.da[k] * &y)) + hb * self.db[k].dot(&y);
        }
        let dy = ay * (2.0 * ha) + &self.b * hb;
        (fa.re, dx, dy)
    }

    /// Jet of an arbitrary `h(α², β)`.
    pub fn compose(&self, y: &[f64], h: impl Fn(Dual2, Dual2) -> Dual2) -> Result<LocalJet> {
        assert!(self.has_derivatives(), "field jet was built without derivatives");
        let n = self.a.nrows();
        if y.len() != n {
            return Err(Error::Dimension { expected: n, got: y.len() });
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroDirection);
        }
        let y = DVector::from_column_slice(y);
        let ay = &self.a * &y;
        let (a2, beta) = (y.dot(&ay), self.b.dot(&y));
        let OuterDerivs([hv, ha, hb, haa, hab, hbb]) = outer(h, a2, beta);

        // ∂A/∂y = 2 a y, ∂B/∂y = b, ∂²A/∂y∂y = 2a
        let a_y = ay * 2.0;
        let b_y = &self.b;
        let mut a_x = DVector::zeros(n);
        let mut b_x = DVector::zeros(n);
        // ∂²A/∂yᵐ∂xᵏ = 2 (∂_k a y)_m, ∂²B/∂yᵐ∂xᵏ = ∂_k b_m
        let mut a_yx = DMatrix::zeros(n, n);
        let mut b_yx = DMatrix::zeros(n, n);
        for k in 0..n {
            let day = &self.da[k] * &y;
            a_x[k] = y.dot(&day);
            b_x[k] = self.db[k].dot(&y);
            a_yx.set_column(k, &(day * 2.0));
            b_yx.set_column(k, &self.db[k]);
        }

        let dx = &a_x * ha + &b_x * hb;
        let dy = &a_y * ha + b_y * hb;
        let dyy = (&a_y * a_y.transpose()) * haa
            + (&a_y * b_y.transpose() + b_y * a_y.transpose()) * hab
            + (b_y * b_y.transpose()) * hbb
            + &self.a * (2.0 * ha);
        let dyx = (&a_y * a_x.transpose()) * haa
            + (&a_y * b_x.transpose() + b_y * a_x.transpose()) * hab
            + (b_y * b_x.transpose()) * hbb
            + a_yx * ha
            + b_yx * hb;
        Ok(LocalJet { value: hv, dx, dy, dyy, dyx })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::{seed_axes, top_mask};

    // Cross-check every entry against the generic nested-dual route.
    #[test]
    fn composition_matches_generic_duals() {
        let p = ManifoldPatch::from_sources(
            "mix",
            vec![[-2.0, 2.0]; 2],
            &["exp(0.2*x1)", "0.1*x1*x2", "0.1*x1*x2", "1 + 0.1*x2^2"],
            &["0.1*sin(x2)", "0.05*x1^2"],
        )
        .unwrap();
        let x = [0.3, -0.7];
        let y = [0.8, 0.4];
        let jet = p.fields(&x).unwrap().jet_f2(&y, Variant::Forward).unwrap();
        let point = [x[0], x[1], y[0], y[1]];
        let eval = |axes: [usize; 2]| {
            let v: Vec<Dual2> = seed_axes(&point, &axes);
            let f = p.finsler_generic(&v[..2], &v[2..], Variant::Forward).unwrap();
            let f2 = f * f;
            (f2.component(0b01), f2.component(top_mask(2)))
        };
        for m in 0..2 {
            for k in 0..2 {
                let (d1, d2) = eval([2 + m, k]);
                assert!((jet.dyx[(m, k)] - d2).abs() < 1e-12);
                assert!((jet.dy[m] - d1).abs() < 1e-12);
                let (_, dyy) = eval([2 + m, 2 + k]);
                assert!((jet.dyy[(m, k)] - dyy).abs() < 1e-12);
                let (dxk, _) = eval([k, k]);
                assert!((jet.dx[k] - dxk).abs() < 1e-12);
            }
        }
    }
}
