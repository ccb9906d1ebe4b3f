//! The Euler / Navier-Stokes pressure split.
//!
//! q = q^E + q^NS where q^E carries the order-one part with boundary data
//! g h and q^NS the viscous part with boundary data 2 eps S^phi(v) n . n.
//! Both solve -div(E grad q) problems on the strip; the Euler right-hand
//! side is assembled in the already-divergence-free form
//! d_z(phi) * tr((grad^phi v)^2), avoiding a second differentiation of the
//! nonlinearity.

use std::sync::Arc;

use ndarray::{Array2, Array3};

use crate::error::Result;
use crate::field::Vec3Field;
use crate::geometry::frame::DiffeoFrame;
use crate::geometry::ops::{div_phi_flux, grad_phi, strain};
use crate::scalar::Real;

use super::problem::{BottomCondition, EllipticProblem, EllipticRhs, SolveReport};
use super::solver::{EllipticOperator, FlatPreconditioner};

/// q^E, q^NS and the Taylor coefficient g - d_z^phi q^E on z = 0.
#[derive(Clone, Debug)]
pub struct PressurePair<S> {
    pub q_e: Array3<S>,
    pub q_ns: Array3<S>,
    pub taylor_coeff: Array2<S>,
}

impl<S: Real> PressurePair<S> {
    pub fn total(&self) -> Array3<S> {
        let mut q = self.q_e.clone();
        q.zip_mut_with(&self.q_ns, |a, &b| *a += b);
        q
    }

    pub fn min_taylor(&self) -> S {
        self.taylor_coeff
            .iter()
            .fold(S::infinity(), |m, &v| m.min(v))
    }
}

/// Solver settings shared by the pressure problems.
#[derive(Clone, Debug)]
pub struct PressureSettings<S> {
    pub tol: S,
    pub max_iter: usize,
    /// Warn threshold for the divergence residual of the input velocity.
    pub div_warn: S,
}

impl<S: Real> Default for PressureSettings<S> {
    fn default() -> Self {
        Self {
            tol: S::of(1e-10),
            max_iter: 400,
            div_warn: S::of(1e-6),
        }
    }
}

/// d_z(phi) * sum_ij d_i^phi v_j d_j^phi v_i, the plain right-hand side of
/// the Euler pressure problem.
pub fn euler_pressure_rhs<S: Real>(
    v: &Vec3Field<S>,
    frame: &DiffeoFrame<S>,
) -> Result<Array3<S>> {
    let g0 = grad_phi(&v.c[0], frame)?;
    let g1 = grad_phi(&v.c[1], frame)?;
    let g2 = grad_phi(&v.c[2], frame)?;
    let grads = [&g0, &g1, &g2];
    let (n1, n2, nz) = frame.grid.shape();
    let mut f = Array3::zeros((n1, n2, nz));
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                let mut tr = S::zero();
                for i in 0..3 {
                    for jj in 0..3 {
                        // (grad^phi v)_{ij} = d_i^phi v_j
                        tr += grads[jj].c[i][idx] * grads[i].c[jj][idx];
                    }
                }
                f[idx] = frame.j[idx] * tr;
            }
        }
    }
    Ok(f)
}

/// Viscous normal-stress boundary data 2 eps (S^phi v) n . n on z = 0.
pub fn viscous_normal_stress<S: Real>(
    v: &Vec3Field<S>,
    frame: &DiffeoFrame<S>,
    eps: S,
) -> Result<Array2<S>> {
    let s = strain(v, frame)?;
    let (n1, n2, _) = frame.grid.shape();
    let mut out = Array2::zeros((n1, n2));
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let idx = (i1, i2, 0);
            let n = frame.unit_normal_at(idx);
            let sn = s.apply(idx, n);
            out[[i1, i2]] =
                S::of(2.0) * eps * (sn[0] * n[0] + sn[1] * n[1] + sn[2] * n[2]);
        }
    }
    Ok(out)
}

/// The Euler part: -div(E grad q^E) = J tr((grad^phi v)^2), q^E(0) = g h.
/// Returns the solution, the solver report and the divergence residual of
/// the input (warned against `div_warn`, never fatal).
pub fn pressure_euler<S: Real>(
    v: &Vec3Field<S>,
    frame: &DiffeoFrame<S>,
    h: &Array2<S>,
    gravity: S,
    precond: &Arc<FlatPreconditioner<S>>,
    settings: &PressureSettings<S>,
) -> Result<(Array3<S>, SolveReport<S>, S)> {
    let grid = frame.grid.clone();
    let div_res = grid.l2_norm(&div_phi_flux(v, frame)?);
    let rhs = euler_pressure_rhs(v, frame)?;
    let top = h.mapv(|x| gravity * x);
    let op = EllipticOperator::new(grid, &frame.e, precond.clone())?;
    let bottom = if precond.bottom_dirichlet {
        BottomCondition::DirichletZero
    } else {
        BottomCondition::NeumannZero
    };
    let problem = EllipticProblem {
        rhs: EllipticRhs::Plain(rhs),
        top_data: top,
        bottom,
    };
    let (q, report) = op.solve(&problem, settings.tol, settings.max_iter)?;
    Ok((q, report, div_res))
}

/// The Navier-Stokes part: -div(E grad q^NS) = 0 with the viscous boundary
/// data; identically zero when eps = 0.
pub fn pressure_ns<S: Real>(
    v: &Vec3Field<S>,
    frame: &DiffeoFrame<S>,
    eps: S,
    precond: &Arc<FlatPreconditioner<S>>,
    settings: &PressureSettings<S>,
) -> Result<(Array3<S>, SolveReport<S>)> {
    let grid = frame.grid.clone();
    if eps == S::zero() {
        return Ok((
            Array3::zeros(grid.shape()),
            SolveReport {
                iterations: 0,
                residual: S::zero(),
                rhs_norm: S::zero(),
            },
        ));
    }
    let top = viscous_normal_stress(v, frame, eps)?;
    let op = EllipticOperator::new(grid.clone(), &frame.e, precond.clone())?;
    let bottom = if precond.bottom_dirichlet {
        BottomCondition::DirichletZero
    } else {
        BottomCondition::NeumannZero
    };
    let problem = EllipticProblem {
        rhs: EllipticRhs::Plain(Array3::zeros(grid.shape())),
        top_data: top,
        bottom,
    };
    let (q, report) = op.solve(&problem, settings.tol, settings.max_iter)?;
    Ok((q, report))
}

/// Taylor coefficient g - d_z^phi q^E on z = 0, differentiated with the
/// spectral boundary row of the vertical scheme.
pub fn taylor_coefficient<S: Real>(
    q_e: &Array3<S>,
    frame: &DiffeoFrame<S>,
    gravity: S,
) -> Array2<S> {
    let grid = &frame.grid;
    let (n1, n2, nz) = grid.shape();
    let mut out = Array2::zeros((n1, n2));
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let mut dq = S::zero();
            for j in 0..nz {
                dq += grid.dz[[0, j]] * q_e[[i1, i2, j]];
            }
            out[[i1, i2]] = gravity - dq / frame.j[[i1, i2, 0]];
        }
    }
    out
}

/// Full split for diagnostics: q^E, q^NS and the Taylor coefficient.
pub fn pressure_pair<S: Real>(
    v: &Vec3Field<S>,
    frame: &DiffeoFrame<S>,
    h: &Array2<S>,
    gravity: S,
    eps: S,
    precond: &Arc<FlatPreconditioner<S>>,
    settings: &PressureSettings<S>,
) -> Result<PressurePair<S>> {
    let (q_e, _, _) = pressure_euler(v, frame, h, gravity, precond, settings)?;
    let (q_ns, _) = pressure_ns(v, frame, eps, precond, settings)?;
    let taylor_coeff = taylor_coefficient(&q_e, frame, gravity);
    Ok(PressurePair {
        q_e,
        q_ns,
        taylor_coeff,
    })
}
