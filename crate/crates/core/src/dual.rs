//! Forward-mode dual numbers that nest.
//!
//! `Dual<f64>` carries one directional derivative, `Dual<Dual<f64>>` a mixed
//! second derivative and `Dual<Dual<Dual<f64>>>` a mixed third derivative.
//! Every level is seeded with its own direction, so the top component of a
//! nested value is the mixed partial along all seeded directions.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed by expression and metric evaluation.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Nesting depth: 0 for `f64`, 1 for `Dual<f64>`, and so on.
    const DEPTH: usize;

    fn cst(v: f64) -> Self;

    /// A variable with value `v` whose derivative at nesting level `k`
    /// (outermost first) is `seeds[k]`.
    fn seeded(v: f64, seeds: &[f64]) -> Self;

    /// The innermost real part.
    fn re(&self) -> f64;

    /// Select a component: bit `k` of `mask` picks the derivative part at
    /// level `k` (outermost first), otherwise the real part.
    fn component(&self, mask: usize) -> f64;

    fn scale(self, s: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn powi(self, k: i32) -> Self;
}

impl Scalar for f64 {
    const DEPTH: usize = 0;

    fn cst(v: f64) -> Self {
        v
    }
    fn seeded(v: f64, _seeds: &[f64]) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn component(&self, _mask: usize) -> f64 {
        *self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
}

/// A dual number `re + du·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Dual { re, du }
    }

    // chain rule for a unary function with value `f` and derivative `df`
    fn chain(self, f: T, df: T) -> Self {
        Dual { re: f, du: self.du * df }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual { re: self.re + o.re, du: self.du + o.du }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual { re: self.re - o.re, du: self.du - o.du }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual { re: self.re * o.re, du: self.re * o.du + self.du * o.re }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let re = self.re / o.re;
        Dual { re, du: (self.du - re * o.du) / o.re }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { re: -self.re, du: -self.du }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    const DEPTH: usize = T::DEPTH + 1;

    fn cst(v: f64) -> Self {
        Dual { re: T::cst(v), du: T::cst(0.0) }
    }

    fn seeded(v: f64, seeds: &[f64]) -> Self {
        let (first, rest) = seeds.split_first().expect("one seed per nesting level");
        Dual { re: T::seeded(v, rest), du: T::cst(*first) }
    }

    fn re(&self) -> f64 {
        self.re.re()
    }

    fn component(&self, mask: usize) -> f64 {
        if mask & 1 == 1 {
            self.du.component(mask >> 1)
        } else {
            self.re.component(mask >> 1)
        }
    }

    fn scale(self, s: f64) -> Self {
        Dual { re: self.re.scale(s), du: self.du.scale(s) }
    }

    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn ln(self) -> Self {
        Dual { re: self.re.ln(), du: self.du / self.re }
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual { re: s, du: self.du / s.scale(2.0) }
    }

    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, T::cst(1.0) - t * t)
    }

    fn powf(self, p: f64) -> Self {
        if p == 0.0 {
            return Self::cst(1.0);
        }
        self.chain(self.re.powf(p), self.re.powf(p - 1.0).scale(p))
    }

    fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::cst(1.0);
        }
        self.chain(self.re.powi(k), self.re.powi(k - 1).scale(k as f64))
    }
}

pub type Dual2 = Dual<Dual<f64>>;
pub type Dual3 = Dual<Dual<Dual<f64>>>;

/// Evaluate `f` at `point` with the nesting levels of `T` seeded along the
/// coordinate axes in `axes` (outermost first).
pub fn seed_axes<T: Scalar>(point: &[f64], axes: &[usize]) -> Vec<T> {
    debug_assert_eq!(axes.len(), T::DEPTH);
    point
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let seeds: Vec<f64> = axes.iter().map(|&a| if a == i { 1.0 } else { 0.0 }).collect();
            T::seeded(v, &seeds)
        })
        .collect()
}

/// Mask selecting the top (all-derivative) component at depth `d`.
pub const fn top_mask(depth: usize) -> usize {
    (1 << depth) - 1
}
