//! Discrete ledger for the energy identity
//! d/dt ( int |v|^2 dV + g int h^2 dy ) + 4 eps int |S^phi v|^2 dV = 0,
//! with dV = d_z(phi) dy dz.

use crate::error::Result;
use crate::geometry::strain;
use crate::scalar::Real;

use super::state::FlowState;

#[derive(Debug, Clone, Copy)]
pub struct EnergyLedger<S> {
    pub kinetic: S,
    pub potential: S,
    /// 4 eps int_0^t int |S^phi v|^2 dV, accumulated by the trapezoid rule.
    pub dissipation_integral: S,
    pub initial_total: S,
    /// kinetic + potential + dissipation_integral - initial_total.
    pub residual: S,
    gravity: S,
    last_rate: S,
    last_t: S,
}

/// int |v|^2 dV over the strip.
pub fn kinetic_energy<S: Real>(state: &FlowState<S>) -> S {
    let grid = &state.grid;
    let (n1, n2, nz) = grid.shape();
    let wy = grid.horizontal_weight();
    let mut acc = S::zero();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                let v2 = state.v.c[0][idx] * state.v.c[0][idx]
                    + state.v.c[1][idx] * state.v.c[1][idx]
                    + state.v.c[2][idx] * state.v.c[2][idx];
                acc += grid.wz[iz] * state.frame.j[idx] * v2;
            }
        }
    }
    acc * wy
}

/// g int h^2 dy over the boundary.
pub fn potential_energy<S: Real>(state: &FlowState<S>, gravity: S) -> S {
    let grid = &state.grid;
    let wy = grid.horizontal_weight();
    gravity * state.surface.h.iter().map(|&h| h * h).sum::<S>() * wy
}

/// 4 eps int |S^phi v|^2 dV, the instantaneous dissipation rate.
pub fn dissipation_rate<S: Real>(state: &FlowState<S>) -> Result<S> {
    if state.eps == S::zero() {
        return Ok(S::zero());
    }
    let grid = &state.grid;
    let s = strain(&state.v, &state.frame)?;
    let (n1, n2, nz) = grid.shape();
    let wy = grid.horizontal_weight();
    let mut acc = S::zero();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                acc += grid.wz[iz] * state.frame.j[idx] * s.frobenius_sq(idx);
            }
        }
    }
    Ok(S::of(4.0) * state.eps * acc * wy)
}

impl<S: Real> EnergyLedger<S> {
    pub fn open(state: &FlowState<S>, gravity: S) -> Result<Self> {
        let kinetic = kinetic_energy(state);
        let potential = potential_energy(state, gravity);
        let rate = dissipation_rate(state)?;
        Ok(Self {
            kinetic,
            potential,
            dissipation_integral: S::zero(),
            initial_total: kinetic + potential,
            residual: S::zero(),
            gravity,
            last_rate: rate,
            last_t: state.t,
        })
    }

    /// Record the quadratures of a new state; the dissipation time integral
    /// advances by the trapezoid rule.
    pub fn update(&mut self, state: &FlowState<S>) -> Result<()> {
        let rate = dissipation_rate(state)?;
        let dt = state.t - self.last_t;
        self.dissipation_integral += dt * (rate + self.last_rate) / S::of(2.0);
        self.last_rate = rate;
        self.last_t = state.t;
        self.kinetic = kinetic_energy(state);
        self.potential = potential_energy(state, self.gravity);
        self.residual =
            self.kinetic + self.potential + self.dissipation_integral - self.initial_total;
        Ok(())
    }

    /// Residual relative to the initial total energy.
    pub fn relative_residual(&self) -> S {
        if self.initial_total > S::zero() {
            self.residual.abs() / self.initial_total
        } else {
            self.residual.abs()
        }
    }
}
