//! Packing and unpacking of the four-field coefficient state.

use crate::fem_core::{DgField, DgLayout};

/// The four discrete fields of the scheme plus the mean-value multipliers.
#[derive(Debug, Clone)]
pub struct DgState {
    /// Velocity (3 components, degree k).
    pub u: DgField,
    /// Pressure (1 component, degree k−1).
    pub p: DgField,
    /// Magnetic field (3 components, degree k).
    pub b: DgField,
    /// Magnetic multiplier (1 component, degree k+1).
    pub r: DgField,
    /// Lagrange multiplier enforcing the zero pressure mean.
    pub mu_p: f64,
    /// Multiplier enforcing the zero mean of `r` (second boundary family).
    pub mu_r: Option<f64>,
}

impl DgState {
    /// All-zero state compatible with `layout`.
    pub fn zeros(layout: &DgLayout) -> Self {
        let d = &layout.dims;
        let ne = layout.n_elems;
        DgState {
            u: DgField::zeros(layout.k, 3, ne, d.m_k),
            p: DgField::zeros(layout.k - 1, 1, ne, d.m_km1),
            b: DgField::zeros(layout.k, 3, ne, d.m_k),
            r: DgField::zeros(layout.k + 1, 1, ne, d.m_kp1),
            mu_p: 0.0,
            mu_r: layout.mu_r().map(|_| 0.0),
        }
    }

    /// Scatter the fields into one global coefficient vector ordered by
    /// the layout's dof map.
    pub fn pack(&self, layout: &DgLayout) -> Vec<f64> {
        let mut x = vec![0.0; layout.total];
        for e in 0..layout.n_elems {
            for c in 0..3 {
                for m in 0..layout.dims.m_k {
                    x[layout.u_dof(e, c, m)] = self.u.coeffs[self.u.idx(e, c, m)];
                    x[layout.b_dof(e, c, m)] = self.b.coeffs[self.b.idx(e, c, m)];
                }
            }
            for m in 0..layout.dims.m_km1 {
                x[layout.p_dof(e, m)] = self.p.coeffs[self.p.idx(e, 0, m)];
            }
            for m in 0..layout.dims.m_kp1 {
                x[layout.r_dof(e, m)] = self.r.coeffs[self.r.idx(e, 0, m)];
            }
        }
        x[layout.mu_p()] = self.mu_p;
        if let (Some(dof), Some(v)) = (layout.mu_r(), self.mu_r) {
            x[dof] = v;
        }
        x
    }

    /// Gather a global coefficient vector back into fields.
    pub fn unpack(layout: &DgLayout, x: &[f64]) -> Self {
        let mut s = DgState::zeros(layout);
        for e in 0..layout.n_elems {
            for c in 0..3 {
                for m in 0..layout.dims.m_k {
                    let iu = s.u.idx(e, c, m);
                    s.u.coeffs[iu] = x[layout.u_dof(e, c, m)];
                    let ib = s.b.idx(e, c, m);
                    s.b.coeffs[ib] = x[layout.b_dof(e, c, m)];
                }
            }
            for m in 0..layout.dims.m_km1 {
                let ip = s.p.idx(e, 0, m);
                s.p.coeffs[ip] = x[layout.p_dof(e, m)];
            }
            for m in 0..layout.dims.m_kp1 {
                let ir = s.r.idx(e, 0, m);
                s.r.coeffs[ir] = x[layout.r_dof(e, m)];
            }
        }
        s.mu_p = x[layout.mu_p()];
        s.mu_r = layout.mu_r().map(|dof| x[dof]);
        s
    }
}
