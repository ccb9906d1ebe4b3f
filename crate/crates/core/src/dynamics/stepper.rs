//! IMEX time stepper for the transformed free-surface system.
//!
//! One step runs two stages of the explicit midpoint rule for advection and
//! the surface update, Crank-Nicolson for the flat-frame viscous operator
//! (the curved-frame correction is advected explicitly), and a pressure
//! projection at the end of every stage so the transformed divergence
//! vanishes at interior nodes up to the solver tolerance.
//!
//! The advection field uses V_z = (v . N - d_t eta) / d_z phi with d_t h
//! substituted from the kinematic update, so the surface is exactly
//! characteristic: V_z = 0 on z = 0.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use ndarray::{Array2, Array3};
use num_complex::Complex;

use crate::elliptic::{
    viscous_normal_stress, BottomCondition, EllipticOperator, EllipticProblem, EllipticRhs,
    FlatPreconditioner,
};
use crate::error::{Error, Result};
use crate::field::Vec3Field;
use crate::geometry::{
    assemble_frame, extend_surface, flux, grad_phi_flux, laplacian_phi, strain, CutoffProfile,
    DiffeoFrame, EtaDeriv, SurfaceState,
};
use crate::grid::StripGrid;
use crate::linalg::LuFactor;
use crate::scalar::Real;

use super::state::FlowState;

/// Numerical settings of one run.
#[derive(Clone, Debug)]
pub struct StepperParams<S> {
    /// Diffeomorphism floor: the run halts if d_z phi drops below this.
    pub c0: S,
    /// Divergence contract checked after each projection.
    pub div_tol: S,
    /// Dynamic boundary-condition defect allowance.
    pub bc_tol: S,
    /// Elliptic solver tolerance and budget.
    pub solver_tol: S,
    pub solver_max_iter: usize,
    /// Lagged-boundary sweeps of the viscous solve.
    pub bc_sweeps: usize,
    /// Zero the top third of the horizontal spectrum of nonlinear terms.
    pub dealias: bool,
    /// Bottom condition of the pressure solves.
    pub bottom_dirichlet: bool,
}

impl<S: Real> Default for StepperParams<S> {
    fn default() -> Self {
        Self {
            c0: S::of(0.5),
            div_tol: S::of(1e-6),
            bc_tol: S::of(1e-4),
            solver_tol: S::of(1e-10),
            solver_max_iter: 600,
            bc_sweeps: 2,
            dealias: false,
            bottom_dirichlet: true,
        }
    }
}

struct ViscousFactors<S> {
    half_dt_eps: S,
    /// Per-mode factors for components with derivative rows top and bottom.
    tangential: Vec<Arc<LuFactor<S>>>,
    /// Per-mode factors for the vertical component (derivative row on top,
    /// Dirichlet bottom).
    normal: Vec<Arc<LuFactor<S>>>,
}

/// Time integrator bound to one grid, cutoff and parameter set.
pub struct Stepper<S: Real> {
    pub grid: Arc<StripGrid<S>>,
    pub chi: CutoffProfile<S>,
    /// Slope constant of the diffeomorphism, fixed at t = 0.
    pub a: S,
    pub gravity: S,
    pub eps: S,
    pub params: StepperParams<S>,
    pub precond: Arc<FlatPreconditioner<S>>,
    visc: RefCell<Option<ViscousFactors<S>>>,
}

impl<S: Real> Stepper<S> {
    pub fn new(
        grid: Arc<StripGrid<S>>,
        chi: CutoffProfile<S>,
        a: S,
        gravity: S,
        eps: S,
        params: StepperParams<S>,
    ) -> Result<Self> {
        let bottom = if params.bottom_dirichlet {
            BottomCondition::DirichletZero
        } else {
            BottomCondition::NeumannZero
        };
        let precond = Arc::new(FlatPreconditioner::new(grid.clone(), a, &bottom)?);
        Ok(Self {
            grid,
            chi,
            a,
            gravity,
            eps,
            params,
            precond,
            visc: RefCell::new(None),
        })
    }

    fn bottom(&self) -> BottomCondition<S> {
        if self.params.bottom_dirichlet {
            BottomCondition::DirichletZero
        } else {
            BottomCondition::NeumannZero
        }
    }

    /// Rebuild surface and frame from new elevation values.
    pub fn rebuild(&self, h: Array2<S>, t: S) -> Result<(SurfaceState<S>, Arc<DiffeoFrame<S>>)> {
        let surface = SurfaceState::from_physical(self.grid.clone(), h, t)?;
        let frame = assemble_frame(&surface, self.a, &self.chi, self.grid.clone(), self.params.c0)?;
        Ok((surface, Arc::new(frame)))
    }

    /// Kinematic rate d_t h = v . N on z = 0.
    pub fn kinematic_rate(&self, v: &Vec3Field<S>, frame: &DiffeoFrame<S>) -> Array2<S> {
        let (n1, n2, _) = self.grid.shape();
        let mut out = Array2::zeros((n1, n2));
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let idx = (i1, i2, 0);
                out[[i1, i2]] = frame.n1_comp[idx] * v.c[0][idx]
                    + frame.n2_comp[idx] * v.c[1][idx]
                    + v.c[2][idx];
            }
        }
        out
    }

    fn dealias(&self, f: &mut Array3<S>) {
        if !self.params.dealias {
            return;
        }
        let (n1, n2, nz) = self.grid.shape();
        let mut spec = self.grid.forward(f);
        let cut1 = n1 / 3;
        let cut2 = n2 / 3;
        for m1 in 0..n1 {
            let k1 = if m1 <= n1 / 2 { m1 } else { n1 - m1 };
            for m2 in 0..n2 {
                let k2 = if m2 <= n2 / 2 { m2 } else { n2 - m2 };
                if (n1 > 1 && k1 > cut1) || (n2 > 1 && k2 > cut2) {
                    for iz in 0..nz {
                        spec[[m1, m2, iz]] = Complex::new(S::zero(), S::zero());
                    }
                }
            }
        }
        *f = self.grid.backward(&spec);
    }

    /// Advection slope -(v_y . grad_y + V_z d_z) v plus, for eps > 0, the
    /// explicit curved-viscous correction eps (Lap^phi - Lap_flat) v.
    /// `dth` is the kinematic rate of the same stage.
    pub fn advection(
        &self,
        v: &Vec3Field<S>,
        surface_rate: &Array2<S>,
        frame: &DiffeoFrame<S>,
    ) -> Result<(Vec3Field<S>, Array3<S>)> {
        let grid = &self.grid;
        let (n1, n2, nz) = grid.shape();

        // d_t eta from the kinematic rate through the same extension
        let rate_surface = SurfaceState::from_physical(grid.clone(), surface_rate.clone(), S::zero())?;
        let eta_t = extend_surface(&rate_surface, &self.chi, grid, EtaDeriv::Id)?;

        let mut v_z = Array3::zeros((n1, n2, nz));
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    let idx = (i1, i2, iz);
                    let vdotn = frame.n1_comp[idx] * v.c[0][idx]
                        + frame.n2_comp[idx] * v.c[1][idx]
                        + v.c[2][idx];
                    v_z[idx] = (vdotn - eta_t[idx]) / frame.j[idx];
                }
            }
        }

        let mut out = Vec3Field::zeros((n1, n2, nz));
        for comp in 0..3 {
            if n2 == 1 && comp == 1 && grid.max_abs(&v.c[1]) == S::zero() {
                continue;
            }
            let d1 = grid.d_horizontal(&v.c[comp], 1);
            let d2 = grid.d_horizontal(&v.c[comp], 2);
            let dz = grid.d_vertical(&v.c[comp]);
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    for iz in 0..nz {
                        let idx = (i1, i2, iz);
                        out.c[comp][idx] = -(v.c[0][idx] * d1[idx]
                            + v.c[1][idx] * d2[idx]
                            + v_z[idx] * dz[idx]);
                    }
                }
            }
        }

        if self.eps > S::zero() {
            for comp in 0..3 {
                let lap_curved = laplacian_phi(&v.c[comp], frame)?;
                let lap_flat = self.flat_laplacian(&v.c[comp]);
                for i1 in 0..n1 {
                    for i2 in 0..n2 {
                        for iz in 0..nz {
                            let idx = (i1, i2, iz);
                            out.c[comp][idx] += self.eps * (lap_curved[idx] - lap_flat[idx]);
                        }
                    }
                }
            }
        }

        for comp in 0..3 {
            self.dealias(&mut out.c[comp]);
        }
        Ok((out, v_z))
    }

    /// Flat-frame Laplacian d_yy + d_y2y2 + (1/A^2) d_zz.
    fn flat_laplacian(&self, f: &Array3<S>) -> Array3<S> {
        let grid = &self.grid;
        let mut spec = grid.forward(f);
        let (n1, n2, nz) = grid.shape();
        for m1 in 0..n1 {
            for m2 in 0..n2 {
                let ksq = grid.k1_deriv[m1] * grid.k1_deriv[m1]
                    + grid.k2_deriv[m2] * grid.k2_deriv[m2];
                for iz in 0..nz {
                    spec[[m1, m2, iz]] = spec[[m1, m2, iz]] * (-ksq);
                }
            }
        }
        let mut out = grid.backward(&spec);
        let dzz = grid.d_vertical(&grid.d_vertical(f));
        let inv_a2 = S::one() / (self.a * self.a);
        out.zip_mut_with(&dzz, |o, &d| *o += inv_a2 * d);
        out
    }

    fn viscous_factors(&self, half_dt_eps: S) -> std::cell::Ref<'_, Option<ViscousFactors<S>>> {
        {
            let cached = self.visc.borrow();
            if let Some(f) = cached.as_ref() {
                if f.half_dt_eps == half_dt_eps {
                    drop(cached);
                    return self.visc.borrow();
                }
            }
        }
        let grid = &self.grid;
        let (n1, n2, nz) = grid.shape();
        let inv_a2 = S::one() / (self.a * self.a);
        let mut cache: HashMap<u64, (Arc<LuFactor<S>>, Arc<LuFactor<S>>)> = HashMap::new();
        let mut tangential = Vec::with_capacity(n1 * n2);
        let mut normal = Vec::with_capacity(n1 * n2);
        for m1 in 0..n1 {
            for m2 in 0..n2 {
                let ksq = grid.k1_deriv[m1] * grid.k1_deriv[m1]
                    + grid.k2_deriv[m2] * grid.k2_deriv[m2];
                let key = ksq.to_f64().unwrap_or(0.0).to_bits();
                let entry = match cache.get(&key) {
                    Some(e) => e.clone(),
                    None => {
                        // interior rows: (1 + b k^2) I - b / A^2 D^2
                        let mut base = Array2::<S>::zeros((nz, nz));
                        for i in 1..nz - 1 {
                            for j in 0..nz {
                                let mut d2 = S::zero();
                                for q in 0..nz {
                                    d2 += grid.dz[[i, q]] * grid.dz[[q, j]];
                                }
                                base[[i, j]] = -half_dt_eps * inv_a2 * d2;
                            }
                            base[[i, i]] += S::one() + half_dt_eps * ksq;
                        }
                        let mut tang = base.clone();
                        let mut norm = base;
                        for j in 0..nz {
                            // stress row on top, free-slip row at the bottom
                            tang[[0, j]] = grid.dz[[0, j]];
                            tang[[nz - 1, j]] = grid.dz[[nz - 1, j]];
                            // divergence-trace row on top, no-penetration bottom
                            norm[[0, j]] = grid.dz[[0, j]];
                            norm[[nz - 1, j]] = S::zero();
                        }
                        norm[[nz - 1, nz - 1]] = S::one();
                        let e = (
                            Arc::new(LuFactor::new(&tang).expect("viscous matrix regular")),
                            Arc::new(LuFactor::new(&norm).expect("viscous matrix regular")),
                        );
                        cache.insert(key, e.clone());
                        e
                    }
                };
                tangential.push(entry.0);
                normal.push(entry.1);
            }
        }
        *self.visc.borrow_mut() = Some(ViscousFactors {
            half_dt_eps,
            tangential,
            normal,
        });
        self.visc.borrow()
    }

    /// Boundary-row targets of the implicit viscous solve, from the current
    /// iterate: the top rows prescribe d_z of each component.
    fn viscous_bc_targets(
        &self,
        v_guess: &Vec3Field<S>,
        frame: &DiffeoFrame<S>,
    ) -> Result<[Array2<S>; 3]> {
        let grid = &self.grid;
        let (n1, n2, _) = grid.shape();
        let s = strain(v_guess, frame)?;
        let dz = [
            grid.d_vertical(&v_guess.c[0]),
            grid.d_vertical(&v_guess.c[1]),
            grid.d_vertical(&v_guess.c[2]),
        ];
        let d1 = [
            grid.d_horizontal(&v_guess.c[0], 1),
            grid.d_horizontal(&v_guess.c[1], 1),
            grid.d_horizontal(&v_guess.c[2], 1),
        ];
        let d2 = [
            grid.d_horizontal(&v_guess.c[0], 2),
            grid.d_horizontal(&v_guess.c[1], 2),
            grid.d_horizontal(&v_guess.c[2], 2),
        ];
        let mut t0 = Array2::zeros((n1, n2));
        let mut t1 = Array2::zeros((n1, n2));
        let mut t2 = Array2::zeros((n1, n2));
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let idx = (i1, i2, 0);
                let n = frame.unit_normal_at(idx);
                let sn = s.apply(idx, n);
                let sndotn = sn[0] * n[0] + sn[1] * n[1] + sn[2] * n[2];
                // tangential stress vector (Pi S n), scaled by 2
                let stress = [
                    S::of(2.0) * (sn[0] - sndotn * n[0]),
                    S::of(2.0) * (sn[1] - sndotn * n[1]),
                ];
                // fixed point: d_z v_i(target) = d_z v_i(guess) - A * stress_i
                t0[[i1, i2]] = dz[0][idx] - self.a * stress[0];
                t1[[i1, i2]] = dz[1][idx] - self.a * stress[1];
                // divergence trace: d_z v3 = eta_1 d_z v1 + eta_2 d_z v2
                //                            - J (d_1 v1 + d_2 v2)
                t2[[i1, i2]] = frame.eta_1[idx] * dz[0][idx] + frame.eta_2[idx] * dz[1][idx]
                    - frame.j[idx] * (d1[0][idx] + d2[1][idx]);
            }
        }
        Ok([t0, t1, t2])
    }

    /// Solve (I - b Lap_flat) v = rhs with the stress / no-penetration
    /// boundary rows, iterating the curved boundary targets.
    fn viscous_solve(
        &self,
        rhs: &Vec3Field<S>,
        frame: &DiffeoFrame<S>,
        half_dt_eps: S,
        guess: &Vec3Field<S>,
    ) -> Result<Vec3Field<S>> {
        let grid = &self.grid;
        let (n1, n2, nz) = grid.shape();
        let factors_ref = self.viscous_factors(half_dt_eps);
        let factors = factors_ref.as_ref().expect("factors just built");

        let mut current = guess.clone();
        for _sweep in 0..self.params.bc_sweeps.max(1) {
            let targets = self.viscous_bc_targets(&current, frame)?;
            let mut next = Vec3Field::zeros((n1, n2, nz));
            for comp in 0..3 {
                if n2 == 1 && comp == 1 {
                    let zero_rhs = grid.max_abs(&rhs.c[1]) == S::zero()
                        && targets[1].iter().all(|&x| x == S::zero());
                    if zero_rhs {
                        continue;
                    }
                }
                let mut spec = grid.forward(&rhs.c[comp]);
                let target_spec = grid.forward_surface(&targets[comp]);
                let lus = if comp == 2 { &factors.normal } else { &factors.tangential };
                let mut re = vec![S::zero(); nz];
                let mut im = vec![S::zero(); nz];
                for m1 in 0..n1 {
                    for m2 in 0..n2 {
                        for iz in 0..nz {
                            let c = spec[[m1, m2, iz]];
                            re[iz] = c.re;
                            im[iz] = c.im;
                        }
                        // boundary rows
                        let tgt = target_spec[[m1, m2]];
                        re[0] = tgt.re;
                        im[0] = tgt.im;
                        re[nz - 1] = S::zero();
                        im[nz - 1] = S::zero();
                        let lu = &lus[m1 * n2 + m2];
                        lu.solve(&mut re);
                        lu.solve(&mut im);
                        for iz in 0..nz {
                            spec[[m1, m2, iz]] = Complex::new(re[iz], im[iz]);
                        }
                    }
                }
                next.c[comp] = grid.backward(&spec);
            }
            current = next;
        }
        Ok(current)
    }

    /// Pressure projection at one stage: q solves the full pressure
    /// problem with the divergence-cleanup right-hand side div(-P v / dt),
    /// and v <- v - dt grad^phi q restores the interior divergence.
    pub fn project(
        &self,
        v: &Vec3Field<S>,
        surface: &SurfaceState<S>,
        frame: &DiffeoFrame<S>,
        dt_stage: S,
    ) -> Result<(Vec3Field<S>, Array3<S>)> {
        let grid = &self.grid;
        let mut top = surface.h.mapv(|x| self.gravity * x);
        if self.eps > S::zero() {
            let stress = viscous_normal_stress(v, frame, self.eps)?;
            top.zip_mut_with(&stress, |a, &b| *a += b);
        }
        let mut f = flux(v, frame);
        f.scale(-S::one() / dt_stage);
        let op = EllipticOperator::new(grid.clone(), &frame.e, self.precond.clone())?;
        let problem = EllipticProblem {
            rhs: EllipticRhs::DivergenceForm(f),
            top_data: top,
            bottom: self.bottom(),
        };
        let (q, _report) = op.solve(&problem, self.params.solver_tol, self.params.solver_max_iter)?;
        let gq = grad_phi_flux(&q, frame)?;
        let mut v_new = v.clone();
        v_new.axpy(-dt_stage, &gq);
        Ok((v_new, q))
    }

    /// One full IMEX step of size dt.
    pub fn step(&self, state: &FlowState<S>, dt: S) -> Result<FlowState<S>> {
        state.check_finite("step input")?;
        let half = dt / S::of(2.0);
        let b = half * self.eps;

        // Stage 1: half-step Euler to the midpoint.
        let rate0 = self.kinematic_rate(&state.v, &state.frame);
        let (adv0, _) = self.advection(&state.v, &rate0, &state.frame)?;
        let mut h_mid = state.surface.h.clone();
        h_mid.zip_mut_with(&rate0, |h, &r| *h += half * r);
        let (surface_mid, frame_mid) = self.rebuild(h_mid, state.t + half)?;
        let mut v_tilde = state.v.clone();
        v_tilde.axpy(half, &adv0);
        let v_visc = if self.eps > S::zero() {
            self.viscous_solve(&v_tilde, &frame_mid, b, &state.v)?
        } else {
            v_tilde
        };
        let (v_mid, _) = self.project(&v_visc, &surface_mid, &frame_mid, half)?;

        // Stage 2: full step with midpoint slopes; Crank-Nicolson for the
        // flat viscous part.
        let rate_mid = self.kinematic_rate(&v_mid, &frame_mid);
        let (adv_mid, _) = self.advection(&v_mid, &rate_mid, &frame_mid)?;
        let mut h_new = state.surface.h.clone();
        h_new.zip_mut_with(&rate_mid, |h, &r| *h += dt * r);
        let (surface_new, frame_new) = self.rebuild(h_new, state.t + dt)?;
        let mut v_rhs = state.v.clone();
        v_rhs.axpy(dt, &adv_mid);
        let v_visc2 = if self.eps > S::zero() {
            for comp in 0..3 {
                let lap0 = self.flat_laplacian(&state.v.c[comp]);
                v_rhs.c[comp].zip_mut_with(&lap0, |a, &l| *a += b * l);
            }
            self.viscous_solve(&v_rhs, &frame_new, b, &v_mid)?
        } else {
            v_rhs
        };
        let (v_new, _q) = self.project(&v_visc2, &surface_new, &frame_new, dt)?;

        let out = FlowState {
            grid: self.grid.clone(),
            v: v_new,
            surface: surface_new,
            frame: frame_new,
            t: state.t + dt,
            eps: self.eps,
        };
        out.check_finite("step output")?;
        Ok(out)
    }

    /// Stability limit: the smaller of the gravity-wave limit
    /// C_wave / omega_max with omega_max = sqrt(g k_max tanh(k_max A H))
    /// and the advective limits C_adv dy / max|v_y|, C_adv dz / max|V_z|.
    /// C_wave = C_adv = 1/2.
    pub fn cfl_limit(&self, state: &FlowState<S>) -> S {
        let grid = &self.grid;
        let c_wave = S::of(0.5);
        let c_adv = S::of(0.5);
        let k_max = grid
            .k1_deriv
            .iter()
            .chain(grid.k2_deriv.iter())
            .fold(S::zero(), |m, &k| m.max(k.abs()));
        let depth_phys = self.a * grid.depth;
        let omega_max = (self.gravity * k_max * (k_max * depth_phys).tanh()).sqrt();
        let mut dt = if omega_max > S::zero() {
            c_wave / omega_max
        } else {
            S::infinity()
        };

        let max_v1 = grid.max_abs(&state.v.c[0]);
        let max_v2 = grid.max_abs(&state.v.c[1]);
        if max_v1 > S::zero() {
            dt = dt.min(c_adv * grid.dy1() / max_v1);
        }
        if grid.n2 > 1 && max_v2 > S::zero() {
            dt = dt.min(c_adv * grid.dy2() / max_v2);
        }

        // vertical advective limit with the local LGL spacing
        let rate0 = self.kinematic_rate(&state.v, &state.frame);
        if let Ok((_, v_z)) = self.advection(&state.v, &rate0, &state.frame) {
            let (n1, n2, nz) = grid.shape();
            let mut limit = S::infinity();
            for iz in 0..nz - 1 {
                let dz_loc = (grid.z[iz] - grid.z[iz + 1]).abs();
                for i1 in 0..n1 {
                    for i2 in 0..n2 {
                        let w = v_z[[i1, i2, iz]].abs();
                        if w > S::zero() {
                            limit = limit.min(c_adv * dz_loc / w);
                        }
                    }
                }
            }
            dt = dt.min(limit);
        }
        dt
    }
}
