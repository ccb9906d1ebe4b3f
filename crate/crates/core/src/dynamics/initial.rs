//! Initial data generators. All of them satisfy the compatibility
//! condition Pi S^phi(v0) n = 0 on z = 0: the standing wave starts from
//! rest, and the rotational variant subtracts a boundary-layer stream
//! correction until the tangential stress trace vanishes.

use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::field::Vec3Field;
use crate::geometry::{assemble_frame, choose_a, strain, CutoffProfile, SurfaceState};
use crate::grid::StripGrid;
use crate::scalar::Real;

use super::state::FlowState;
use super::stepper::{Stepper, StepperParams};

/// Elevation a cos(k y) at rest (v = 0). A standing wave at maximum
/// displacement: the compatibility condition holds trivially.
pub fn standing_wave<S: Real>(
    grid: Arc<StripGrid<S>>,
    chi: &CutoffProfile<S>,
    mode: usize,
    amplitude: S,
    eps: S,
    c0: S,
) -> Result<(FlowState<S>, S)> {
    let surface = SurfaceState::cosine_mode(grid.clone(), mode, amplitude)?;
    let a = choose_a(&surface, chi, &grid)?;
    let frame = Arc::new(assemble_frame(&surface, a, chi, grid.clone(), c0)?);
    let state = FlowState {
        grid: grid.clone(),
        v: Vec3Field::zeros(grid.shape()),
        surface,
        frame,
        t: S::zero(),
        eps,
    };
    Ok((state, a))
}

/// Standing wave plus a weak horizontal shear v1 = c G(z), made compatible
/// and divergence-free by alternating stress correction and projection.
/// Only d = 1 is supported (the stream-function correction is planar).
pub fn sheared_wave<S: Real>(
    grid: Arc<StripGrid<S>>,
    chi: &CutoffProfile<S>,
    mode: usize,
    amplitude: S,
    shear: S,
    eps: S,
    gravity: S,
    params: &StepperParams<S>,
) -> Result<(FlowState<S>, S)> {
    if grid.n2 > 1 {
        return Err(Error::Domain(
            "rotational initial data is implemented for d = 1 only".into(),
        ));
    }
    let (mut state, a) = standing_wave(grid.clone(), chi, mode, amplitude, eps, params.c0)?;
    // shear profile with zero derivative at both boundaries
    let depth = grid.depth;
    for i1 in 0..grid.n1 {
        for iz in 0..grid.nz {
            let z = grid.z[iz];
            let s = z / depth; // in [-1, 0]
            state.v.c[0][[i1, 0, iz]] = shear * (S::PI() * s).cos();
        }
    }

    let stepper = Stepper::new(
        grid.clone(),
        chi.clone(),
        a,
        gravity,
        eps,
        params.clone(),
    )?;
    for _ in 0..3 {
        if eps > S::zero() {
            apply_stress_correction(&mut state)?;
        }
        let (v, _) = stepper.project(&state.v, &state.surface, &state.frame, S::one())?;
        state.v = v;
    }
    if eps > S::zero() {
        let defect = tangential_stress_sup(&state)?;
        if defect > params.bc_tol {
            return Err(Error::Precondition(format!(
                "compatibility correction did not converge: stress trace {defect}"
            )));
        }
    }
    Ok((state, a))
}

/// Sup of |Pi S^phi v n| over the surface.
pub fn tangential_stress_sup<S: Real>(state: &FlowState<S>) -> Result<S> {
    let s = strain(&state.v, &state.frame)?;
    let (n1, n2, _) = state.grid.shape();
    let mut worst = S::zero();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let idx = (i1, i2, 0);
            let n = state.frame.unit_normal_at(idx);
            let sn = s.apply(idx, n);
            let sndotn = sn[0] * n[0] + sn[1] * n[1] + sn[2] * n[2];
            for c in 0..3 {
                worst = worst.max((sn[c] - sndotn * n[c]).abs());
            }
        }
    }
    Ok(worst)
}

/// Subtract the stream-function correction psi = f(y) g(z) with g(0) = 0,
/// g'(0) = 0, g''(0) = 1, so the tangential stress trace cancels to
/// leading order.
fn apply_stress_correction<S: Real>(state: &mut FlowState<S>) -> Result<()> {
    let grid = &state.grid;
    let s = strain(&state.v, &state.frame)?;
    let (n1, _, nz) = grid.shape();
    // f(y) = -2 (Pi S n)_1 (the first tangential component, d = 1)
    let mut f = Array2::zeros((n1, 1));
    for i1 in 0..n1 {
        let idx = (i1, 0, 0);
        let n = state.frame.unit_normal_at(idx);
        let sn = s.apply(idx, n);
        let sndotn = sn[0] * n[0] + sn[1] * n[1] + sn[2] * n[2];
        f[[i1, 0]] = -S::of(2.0) * (sn[0] - sndotn * n[0]);
    }
    let f1 = {
        let spec = grid.forward_surface(&f);
        let mut d = spec;
        for m1 in 0..n1 {
            d[[m1, 0]] = d[[m1, 0]] * num_complex::Complex::new(S::zero(), grid.k1_deriv[m1]);
        }
        grid.backward_surface(&d)
    };
    let ell = S::of(0.2);
    for i1 in 0..n1 {
        for iz in 0..nz {
            let z = grid.z[iz];
            let g = z * z / S::of(2.0) * (z / ell).exp();
            let gp = (z + z * z / (S::of(2.0) * ell)) * (z / ell).exp();
            // delta v = (d_z psi, 0, -d_1 psi)
            state.v.c[0][[i1, 0, iz]] += f[[i1, 0]] * gp;
            state.v.c[2][[i1, 0, iz]] -= f1[[i1, 0]] * g;
        }
    }
    Ok(())
}
