//! Manufactured solutions for the stationary incompressible MHD system.
//!
//! All fields live on the unit cube. The velocity is the curl of a vector
//! potential whose components vanish to second order on the boundary, so
//! `u` is exactly divergence-free and satisfies the no-slip condition.
//! The magnetic field is the curl of a scalar stream function chosen per
//! boundary-condition family:
//!
//! * [`BcType::Type1`] (perfectly conducting wall): `n × b = 0` and
//!   `r = 0` on the boundary;
//! * [`BcType::Type2`] (wall transparent to the tangential current):
//!   `b · n = 0` and `n × (∇×b) = 0` on the boundary, with the scalar
//!   multiplier having zero mean.
//!
//! The body forces `f` and `g` are obtained by evaluating the closed-form
//! fields on (nested) dual numbers and assembling the continuous momentum
//! and induction residuals; there is no symbolic algebra and no
//! finite-difference truncation error in the forcing data.

use std::f64::consts::PI;

use crate::fem_core::{seed_gradient, seed_hessian, Dual3, Scalar};
use crate::{BcType, Params};

/// A complete manufactured case: exact fields, their derivatives, and the
/// body forces for the parameter set carried inside.
#[derive(Debug, Clone)]
pub struct MmsCase {
    /// Which boundary-condition family the magnetic fields satisfy.
    pub bc: BcType,
    /// Physical parameters entering the forcing terms.
    pub params: Params,
    /// Amplitude of the manufactured pressure (the dial used by the
    /// pressure-robustness experiment).
    pub amplitude: f64,
    /// Overall scale of the velocity, magnetic, and multiplier fields;
    /// kept small so the fixed-point iteration contracts.
    pub scale: f64,
}

/// Default manufactured case: field scale 0.1 and the given pressure
/// amplitude.
pub fn make_default_mms(bc: BcType, params: Params, amplitude: f64) -> MmsCase {
    MmsCase { bc, params, amplitude, scale: 0.1 }
}

/// Lift a point to one more dual level, seeding the three coordinate
/// directions (generic analogue of [`seed_gradient`]).
fn lift<T: Scalar>(x: [T; 3]) -> [Dual3<T>; 3] {
    std::array::from_fn(|i| {
        let mut d = [T::from_f64(0.0); 3];
        d[i] = T::from_f64(1.0);
        Dual3 { re: x[i], d }
    })
}

fn cross<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Scalar potential for the velocity: `scale · [x(1−x)y(1−y)z(1−z)]²`.
fn psi<T: Scalar>(x: [T; 3], scale: f64) -> T {
    let one = T::from_f64(1.0);
    let q = x[0] * (one - x[0]) * x[1] * (one - x[1]) * x[2] * (one - x[2]);
    T::from_f64(scale) * q * q
}

/// Stream function for the magnetic field, per boundary family.
fn stream<T: Scalar>(bc: BcType, x: [T; 3], scale: f64) -> T {
    let pi = T::from_f64(PI);
    let sx = (pi * x[0]).sin();
    let sy = (pi * x[1]).sin();
    let sz = (pi * x[2]).sin();
    match bc {
        // sin²·sin²·sin: the tangential trace of b vanishes on every face.
        BcType::Type1 => T::from_f64(scale) * sx * sx * sy * sy * sz,
        // sin³·sin³·sin³: first AND second derivatives vanish at the walls,
        // which kills both b·n and the tangential part of ∇×b there.
        BcType::Type2 => T::from_f64(0.5 * scale) * sx.powi(3) * sy.powi(3) * sz.powi(3),
    }
}

/// Velocity `u = ∇×(ψ, ψ, ψ)`; exactly divergence-free.
fn u_field<T: Scalar>(x: [T; 3], scale: f64) -> [T; 3] {
    let p = psi(lift(x), scale);
    [p.d[1] - p.d[2], p.d[2] - p.d[0], p.d[0] - p.d[1]]
}

/// Magnetic field `b = ∇×(0, 0, w) = (∂_y w, −∂_x w, 0)`; exactly
/// divergence-free.
fn b_field<T: Scalar>(bc: BcType, x: [T; 3], scale: f64) -> [T; 3] {
    let w = stream(bc, lift(x), scale);
    [w.d[1], -w.d[0], T::from_f64(0.0)]
}

/// Pressure `amplitude · cos(πx)cos(πy)`; zero mean on the unit cube.
fn p_field<T: Scalar>(x: [T; 3], amplitude: f64) -> T {
    let pi = T::from_f64(PI);
    T::from_f64(amplitude) * (pi * x[0]).cos() * (pi * x[1]).cos()
}

/// Magnetic multiplier: vanishes on the boundary for the first family;
/// zero-mean (but boundary-free) for the second.
fn r_field<T: Scalar>(bc: BcType, x: [T; 3], scale: f64) -> T {
    let pi = T::from_f64(PI);
    match bc {
        BcType::Type1 => {
            T::from_f64(scale) * (pi * x[0]).sin() * (pi * x[1]).sin() * (pi * x[2]).sin()
        }
        BcType::Type2 => {
            T::from_f64(scale) * (pi * x[0]).cos() * (pi * x[1]).cos() * (pi * x[2]).cos()
        }
    }
}

impl MmsCase {
    /// Exact velocity.
    pub fn u(&self, x: [f64; 3]) -> [f64; 3] {
        u_field(x, self.scale)
    }

    /// Velocity gradient; `grad_u[i][j] = ∂u_i/∂x_j`.
    pub fn grad_u(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let u = u_field(seed_gradient(x), self.scale);
        std::array::from_fn(|i| u[i].d)
    }

    /// Exact magnetic field.
    pub fn b(&self, x: [f64; 3]) -> [f64; 3] {
        b_field(self.bc, x, self.scale)
    }

    /// Magnetic gradient; `grad_b[i][j] = ∂b_i/∂x_j`.
    pub fn grad_b(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let b = b_field(self.bc, seed_gradient(x), self.scale);
        std::array::from_fn(|i| b[i].d)
    }

    /// Curl of the magnetic field.
    pub fn curl_b(&self, x: [f64; 3]) -> [f64; 3] {
        let b = b_field(self.bc, seed_gradient(x), self.scale);
        [
            b[2].d[1] - b[1].d[2],
            b[0].d[2] - b[2].d[0],
            b[1].d[0] - b[0].d[1],
        ]
    }

    /// Exact pressure.
    pub fn p(&self, x: [f64; 3]) -> f64 {
        p_field(x, self.amplitude)
    }

    /// Pressure gradient.
    pub fn grad_p(&self, x: [f64; 3]) -> [f64; 3] {
        p_field(seed_gradient(x), self.amplitude).d
    }

    /// Exact magnetic multiplier.
    pub fn r(&self, x: [f64; 3]) -> f64 {
        r_field(self.bc, x, self.scale)
    }

    /// Multiplier gradient.
    pub fn grad_r(&self, x: [f64; 3]) -> [f64; 3] {
        r_field(self.bc, seed_gradient(x), self.scale).d
    }

    /// Momentum forcing
    /// `f = −νΔu + (u·∇)u + ∇p − κ(∇×b)×b`.
    pub fn f(&self, x: [f64; 3]) -> [f64; 3] {
        let nu = self.params.nu;
        let kappa = self.params.kappa;
        // Value, gradient, and Hessian of every velocity component in one
        // nested-dual sweep.
        let u2 = u_field(seed_hessian(x), self.scale);
        let u: [f64; 3] = std::array::from_fn(|i| u2[i].re.re);
        let jac: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| u2[i].d[j].re));
        let lap: [f64; 3] =
            std::array::from_fn(|i| (0..3).map(|j| u2[i].d[j].d[j]).sum::<f64>());
        let gp = self.grad_p(x);
        let b = self.b(x);
        let lorentz = cross(self.curl_b(x), b);
        std::array::from_fn(|i| {
            let conv: f64 = (0..3).map(|j| u[j] * jac[i][j]).sum();
            -nu * lap[i] + conv + gp[i] - kappa * lorentz[i]
        })
    }

    /// Induction forcing
    /// `g = κν_m ∇×(∇×b) + ∇r − κ∇×(u×b)`.
    pub fn g(&self, x: [f64; 3]) -> [f64; 3] {
        let kappa = self.params.kappa;
        let nu_m = self.params.nu_m;
        // Hessians of the magnetic components give the double curl
        // honestly: (∇×(∇×b))_i = Σ_j ∂_i∂_j b_j − Δ b_i.
        let b2 = b_field(self.bc, seed_hessian(x), self.scale);
        let curl_curl: [f64; 3] = std::array::from_fn(|i| {
            (0..3).map(|j| b2[j].d[i].d[j] - b2[i].d[j].d[j]).sum::<f64>()
        });
        // One dual sweep over the composite u×b gives its curl.
        let xd = seed_gradient(x);
        let m = cross(u_field(xd, self.scale), b_field(self.bc, xd, self.scale));
        let curl_m = [
            m[2].d[1] - m[1].d[2],
            m[0].d[2] - m[2].d[0],
            m[1].d[0] - m[0].d[1],
        ];
        let gr = self.grad_r(x);
        std::array::from_fn(|i| kappa * nu_m * curl_curl[i] + gr[i] - kappa * curl_m[i])
    }
}
