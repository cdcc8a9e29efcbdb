//! Forward-mode dual numbers with three tangent directions.
//!
//! [`Dual3<f64>`] carries a value and its gradient in one sweep;
//! [`Dual3<Dual3<f64>>`] (nesting) carries the full Hessian. The
//! manufactured-solution machinery evaluates closed-form fields on these
//! types to obtain the exact derivatives — Laplacians, curls,
//! curl-of-curls — appearing in the MHD forcing terms, with no symbolic
//! differentiation and no finite-difference error.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar abstraction over which manufactured fields are written: plain
/// `f64` or (nested) dual numbers.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Lift a constant.
    fn from_f64(v: f64) -> Self;
    /// Sine with derivative propagation.
    fn sin(self) -> Self;
    /// Cosine with derivative propagation.
    fn cos(self) -> Self;
    /// Small non-negative integer power (exact product chain).
    fn powi(self, n: u32) -> Self {
        let mut acc = Self::from_f64(1.0);
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
}

/// A dual number with three tangents: value `re` plus first-order
/// perturbations `d[0..3]` (∂/∂x, ∂/∂y, ∂/∂z under the standard seeding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual3<T> {
    /// Primal value.
    pub re: T,
    /// Tangent components.
    pub d: [T; 3],
}

impl<T: Scalar> Dual3<T> {
    /// Constant (zero tangents).
    pub fn constant(v: T) -> Self {
        let z = T::from_f64(0.0);
        Dual3 { re: v, d: [z, z, z] }
    }
}

impl<T: Scalar> Add for Dual3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual3 {
            re: self.re + o.re,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1], self.d[2] + o.d[2]],
        }
    }
}

impl<T: Scalar> Sub for Dual3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual3 {
            re: self.re - o.re,
            d: [self.d[0] - o.d[0], self.d[1] - o.d[1], self.d[2] - o.d[2]],
        }
    }
}

impl<T: Scalar> Mul for Dual3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual3 {
            re: self.re * o.re,
            d: [
                self.d[0] * o.re + self.re * o.d[0],
                self.d[1] * o.re + self.re * o.d[1],
                self.d[2] * o.re + self.re * o.d[2],
            ],
        }
    }
}

impl<T: Scalar> Div for Dual3<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual3 {
            re: q,
            d: [
                (self.d[0] - q * o.d[0]) / o.re,
                (self.d[1] - q * o.d[1]) / o.re,
                (self.d[2] - q * o.d[2]) / o.re,
            ],
        }
    }
}

impl<T: Scalar> Neg for Dual3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual3 { re: -self.re, d: [-self.d[0], -self.d[1], -self.d[2]] }
    }
}

impl<T: Scalar> Scalar for Dual3<T> {
    fn from_f64(v: f64) -> Self {
        Dual3::constant(T::from_f64(v))
    }
    fn sin(self) -> Self {
        let c = self.re.cos();
        Dual3 { re: self.re.sin(), d: [c * self.d[0], c * self.d[1], c * self.d[2]] }
    }
    fn cos(self) -> Self {
        let ms = -self.re.sin();
        Dual3 { re: self.re.cos(), d: [ms * self.d[0], ms * self.d[1], ms * self.d[2]] }
    }
}

/// Seed a point for first derivatives: variable `i` gets tangent `eᵢ`.
pub fn seed_gradient(x: [f64; 3]) -> [Dual3<f64>; 3] {
    std::array::from_fn(|i| {
        let mut d = [0.0; 3];
        d[i] = 1.0;
        Dual3 { re: x[i], d }
    })
}

/// Seed a point for second derivatives via nesting. For output `v`:
/// value `v.re.re`, gradient `v.re.d[i]` (= `v.d[i].re`), Hessian
/// `v.d[i].d[j] = ∂ᵢ∂ⱼ`.
pub fn seed_hessian(x: [f64; 3]) -> [Dual3<Dual3<f64>>; 3] {
    std::array::from_fn(|i| {
        let mut inner_d = [0.0; 3];
        inner_d[i] = 1.0;
        let re = Dual3 { re: x[i], d: inner_d };
        let d = std::array::from_fn(|j| {
            Dual3::constant(if i == j { 1.0 } else { 0.0 })
        });
        Dual3 { re, d }
    })
}
