//! The smoothing diffeomorphism of the strip and its metric quantities.
//!
//! phi(t, y, z) = A z + eta(t, y, z) with eta the frequency-localized
//! extension of the elevation h. Every z-derivative of eta is evaluated from
//! the closed form of the extension (cutoff derivatives), not by discrete
//! differentiation, so the metric coefficients carry no collocation error.

use std::sync::Arc;

use ndarray::Array3;
use num_complex::Complex;

use crate::error::{Error, GridLocation, Result};
use crate::grid::StripGrid;
use crate::linalg::sym3_eigenvalues;
use crate::scalar::Real;

use super::cutoff::CutoffProfile;
use super::surface::SurfaceState;

/// Which closed-form derivative of the extension to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaDeriv {
    /// eta itself
    Id,
    /// d/dz
    Z,
    /// d2/dz2
    Zz,
}

/// Evaluate the extension eta (or a closed-form z-derivative of it) of the
/// elevation: etahat(xi, z) = chi(|z| |xi|) hhat(xi) per horizontal mode.
/// The mean mode xi = 0 extends constantly (chi(0) = 1).
pub fn extend_surface<S: Real>(
    surface: &SurfaceState<S>,
    chi: &CutoffProfile<S>,
    grid: &StripGrid<S>,
    deriv: EtaDeriv,
) -> Result<Array3<S>> {
    if surface.h.dim() != (grid.n1, grid.n2) {
        return Err(Error::ShapeMismatch {
            expected: (grid.n1, grid.n2, grid.nz),
            got: (surface.h.dim().0, surface.h.dim().1, grid.nz),
        });
    }
    let (n1, n2, nz) = grid.shape();
    let mut spec: Array3<Complex<S>> = Array3::zeros((n1, n2, nz));
    for m1 in 0..n1 {
        for m2 in 0..n2 {
            let coeff = surface.h_hat[[m1, m2]];
            if coeff.norm_sqr() == S::zero() {
                continue;
            }
            let k_abs = grid.k_sq(m1, m2).sqrt();
            for iz in 0..nz {
                let s = grid.z[iz].abs() * k_abs;
                let [c, dc, ddc] = chi.eval(s);
                // |z| = -z on the strip, so d/dz(|z| |xi|) = -|xi|.
                let factor = match deriv {
                    EtaDeriv::Id => c,
                    EtaDeriv::Z => -k_abs * dc,
                    EtaDeriv::Zz => k_abs * k_abs * ddc,
                };
                spec[[m1, m2, iz]] = coeff * factor;
            }
        }
    }
    Ok(grid.backward(&spec))
}

/// A = 1 + max |d_z eta(0, .)| so that min d_z phi(0, .) >= 1.
pub fn choose_a<S: Real>(
    h0: &SurfaceState<S>,
    chi: &CutoffProfile<S>,
    grid: &StripGrid<S>,
) -> Result<S> {
    let eta_z = extend_surface(h0, chi, grid, EtaDeriv::Z)?;
    Ok(S::one() + grid.max_abs(&eta_z))
}

/// Pointwise symmetric matrix E = P P^T / d_z(phi); E12 = E21 = 0 always.
pub struct MetricE<S> {
    pub e11: Array3<S>,
    pub e22: Array3<S>,
    pub e33: Array3<S>,
    pub e13: Array3<S>,
    pub e23: Array3<S>,
}

impl<S: Real> MetricE<S> {
    pub fn at(&self, idx: (usize, usize, usize)) -> [[S; 3]; 3] {
        let z = S::zero();
        [
            [self.e11[idx], z, self.e13[idx]],
            [z, self.e22[idx], self.e23[idx]],
            [self.e13[idx], self.e23[idx], self.e33[idx]],
        ]
    }

    /// E x for a pointwise 3-vector.
    pub fn apply(&self, idx: (usize, usize, usize), x: [S; 3]) -> [S; 3] {
        [
            self.e11[idx] * x[0] + self.e13[idx] * x[2],
            self.e22[idx] * x[1] + self.e23[idx] * x[2],
            self.e13[idx] * x[0] + self.e23[idx] * x[1] + self.e33[idx] * x[2],
        ]
    }
}

/// All metric quantities of the diffeomorphism at one time level.
/// Immutable after assembly.
pub struct DiffeoFrame<S: Real> {
    pub grid: Arc<StripGrid<S>>,
    pub a: S,
    /// Extension eta und its first derivatives.
    pub eta: Array3<S>,
    pub eta_1: Array3<S>,
    pub eta_2: Array3<S>,
    pub eta_z: Array3<S>,
    /// Second derivatives of eta.
    pub eta_11: Array3<S>,
    pub eta_12: Array3<S>,
    pub eta_22: Array3<S>,
    pub eta_1z: Array3<S>,
    pub eta_2z: Array3<S>,
    pub eta_zz: Array3<S>,
    /// phi = A z + eta.
    pub phi: Array3<S>,
    /// Jacobian J = d_z phi = A + d_z eta.
    pub j: Array3<S>,
    /// Outward-normal direction N = (-d_1 phi, -d_2 phi, 1), whole strip.
    pub n1_comp: Array3<S>,
    pub n2_comp: Array3<S>,
    /// |N|.
    pub n_norm: Array3<S>,
    pub e: MetricE<S>,
    /// min over grid of J.
    pub min_j: S,
    /// min over grid of the smallest eigenvalue of E (delta).
    pub min_eig_e: S,
}

impl<S: Real> std::fmt::Debug for DiffeoFrame<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiffeoFrame")
            .field("a", &self.a)
            .field("min_j", &self.min_j)
            .field("min_eig_e", &self.min_eig_e)
            .finish()
    }
}

/// Build the frame; fails with the offending location if J < c0 anywhere.
pub fn assemble_frame<S: Real>(
    surface: &SurfaceState<S>,
    a: S,
    chi: &CutoffProfile<S>,
    grid: Arc<StripGrid<S>>,
    c0: S,
) -> Result<DiffeoFrame<S>> {
    let eta = extend_surface(surface, chi, &grid, EtaDeriv::Id)?;
    let eta_z = extend_surface(surface, chi, &grid, EtaDeriv::Z)?;
    let eta_zz = extend_surface(surface, chi, &grid, EtaDeriv::Zz)?;

    let spec_eta = grid.forward(&eta);
    let spec_eta_z = grid.forward(&eta_z);
    let horiz = |spec: &Array3<Complex<S>>, axis: usize| -> Array3<S> {
        let mut s = spec.clone();
        grid.d_horizontal_spec(&mut s, axis);
        grid.backward(&s)
    };
    let eta_1 = horiz(&spec_eta, 1);
    let eta_2 = horiz(&spec_eta, 2);
    let eta_1z = horiz(&spec_eta_z, 1);
    let eta_2z = horiz(&spec_eta_z, 2);
    let spec_eta_1 = grid.forward(&eta_1);
    let eta_11 = horiz(&spec_eta_1, 1);
    let eta_12 = horiz(&spec_eta_1, 2);
    let spec_eta_2 = grid.forward(&eta_2);
    let eta_22 = horiz(&spec_eta_2, 2);

    let (n1g, n2g, nz) = grid.shape();
    let mut phi = Array3::zeros((n1g, n2g, nz));
    let mut j = Array3::zeros((n1g, n2g, nz));
    let mut min_j = S::infinity();
    let mut min_loc = GridLocation { i1: 0, i2: 0, iz: 0 };
    for i1 in 0..n1g {
        for i2 in 0..n2g {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                phi[idx] = a * grid.z[iz] + eta[idx];
                let jj = a + eta_z[idx];
                j[idx] = jj;
                if jj < min_j {
                    min_j = jj;
                    min_loc = GridLocation { i1, i2, iz };
                }
            }
        }
    }
    if !(min_j >= c0) {
        return Err(Error::DiffeoBreakdown {
            value: min_j.to_f64().unwrap_or(f64::NAN),
            c0: c0.to_f64().unwrap_or(f64::NAN),
            location: min_loc,
        });
    }

    let mut n1_comp = Array3::zeros((n1g, n2g, nz));
    let mut n2_comp = Array3::zeros((n1g, n2g, nz));
    let mut n_norm = Array3::zeros((n1g, n2g, nz));
    let mut e = MetricE {
        e11: Array3::zeros((n1g, n2g, nz)),
        e22: Array3::zeros((n1g, n2g, nz)),
        e33: Array3::zeros((n1g, n2g, nz)),
        e13: Array3::zeros((n1g, n2g, nz)),
        e23: Array3::zeros((n1g, n2g, nz)),
    };
    let mut min_eig = S::infinity();
    for i1 in 0..n1g {
        for i2 in 0..n2g {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                let p1 = eta_1[idx];
                let p2 = eta_2[idx];
                let jj = j[idx];
                n1_comp[idx] = -p1;
                n2_comp[idx] = -p2;
                n_norm[idx] = (S::one() + p1 * p1 + p2 * p2).sqrt();
                e.e11[idx] = jj;
                e.e22[idx] = jj;
                e.e13[idx] = -p1;
                e.e23[idx] = -p2;
                e.e33[idx] = (S::one() + p1 * p1 + p2 * p2) / jj;
                let ev = sym3_eigenvalues(&e.at(idx));
                min_eig = min_eig.min(ev[0]);
            }
        }
    }
    if !(min_eig > S::zero()) {
        return Err(Error::IndefiniteCoefficients {
            min_eig: min_eig.to_f64().unwrap_or(f64::NAN),
            location: min_loc,
        });
    }

    Ok(DiffeoFrame {
        grid,
        a,
        eta,
        eta_1,
        eta_2,
        eta_z,
        eta_11,
        eta_12,
        eta_22,
        eta_1z,
        eta_2z,
        eta_zz,
        phi,
        j,
        n1_comp,
        n2_comp,
        n_norm,
        e,
        min_j,
        min_eig_e: min_eig,
    })
}

impl<S: Real> DiffeoFrame<S> {
    /// Flat frame (h = 0) with a given A; never fails.
    pub fn flat(grid: Arc<StripGrid<S>>, a: S) -> Self {
        let surface = SurfaceState::zero(grid.clone());
        let chi = CutoffProfile::default_profile();
        assemble_frame(&surface, a, &chi, grid, S::of(0.5).min(a / S::of(2.0)))
            .expect("flat frame always valid")
    }

    /// Unit normal on the whole strip: N / |N|.
    pub fn unit_normal_at(&self, idx: (usize, usize, usize)) -> [S; 3] {
        let inv = S::one() / self.n_norm[idx];
        [self.n1_comp[idx] * inv, self.n2_comp[idx] * inv, inv]
    }

    /// Unnormalized N at a grid point.
    pub fn normal_at(&self, idx: (usize, usize, usize)) -> [S; 3] {
        [self.n1_comp[idx], self.n2_comp[idx], S::one()]
    }

    /// E - P P^T / J residual, max over grid (exact algebraic identity,
    /// rounding-level by construction; used as a self-check).
    pub fn e_identity_defect(&self) -> S {
        let (n1, n2, nz) = self.grid.shape();
        let mut worst = S::zero();
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    let idx = (i1, i2, iz);
                    let jj = self.j[idx];
                    let p1 = self.eta_1[idx];
                    let p2 = self.eta_2[idx];
                    // P rows: (J,0,0), (0,J,0), (-p1,-p2,1)
                    let pp = [
                        [jj * jj, S::zero(), -jj * p1],
                        [S::zero(), jj * jj, -jj * p2],
                        [-jj * p1, -jj * p2, p1 * p1 + p2 * p2 + S::one()],
                    ];
                    let em = self.e.at(idx);
                    for r in 0..3 {
                        for c in 0..3 {
                            worst = worst.max((em[r][c] - pp[r][c] / jj).abs());
                        }
                    }
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cutoff::CutoffProfile;
    use ndarray::Array2;

    fn grid() -> Arc<StripGrid<f64>> {
        Arc::new(StripGrid::new(32, 1, 24, 2.0 * std::f64::consts::PI, 1.0, 2.0).unwrap())
    }

    #[test]
    fn zero_surface_extends_to_zero() {
        let g = grid();
        let chi = CutoffProfile::default_profile();
        let s = SurfaceState::zero(g.clone());
        let eta = extend_surface(&s, &chi, &g, EtaDeriv::Id).unwrap();
        assert_eq!(g.max_abs(&eta), 0.0);
    }

    #[test]
    fn plateau_case_is_exact() {
        // h = cos(2y), |z xi| = 0.5 <= r1 at z = -0.25, so eta = cos(2y) there.
        let g = grid();
        let chi = CutoffProfile::default_profile();
        let s = SurfaceState::cosine_mode(g.clone(), 2, 1.0).unwrap();
        let eta = extend_surface(&s, &chi, &g, EtaDeriv::Id).unwrap();
        // pick the node closest to z = -0.25 (inside the plateau |z| <= 0.5)
        let iz = (0..g.nz)
            .min_by(|&i, &j| {
                (g.z[i] + 0.25)
                    .abs()
                    .partial_cmp(&(g.z[j] + 0.25).abs())
                    .unwrap()
            })
            .unwrap();
        assert!(g.z[iz].abs() * 2.0 <= 1.0, "node must sit inside the plateau");
        for i1 in 0..g.n1 {
            let y = g.horizontal_coord1(i1);
            assert!((eta[[i1, 0, iz]] - (2.0 * y).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_closed_form() {
        let g = grid();
        let chi = CutoffProfile::default_profile();
        let a = 0.3;
        let k = 3usize;
        let s = SurfaceState::cosine_mode(g.clone(), k, a).unwrap();
        let eta = extend_surface(&s, &chi, &g, EtaDeriv::Id).unwrap();
        let kv = g.k1[k];
        for i1 in (0..g.n1).step_by(3) {
            for iz in 0..g.nz {
                let y = g.horizontal_coord1(i1);
                let expect = a * chi.chi(kv * g.z[iz].abs()) * (kv * y).cos();
                assert!((eta[[i1, 0, iz]] - expect).abs() < 1e-12);
            }
        }
        // sup |eta| <= sup |h| (chi <= 1), with tiny rounding slack
        let hmax = s.max_abs();
        assert!(g.max_abs(&eta) / hmax <= 1.0 + 1e-10);
    }

    #[test]
    fn choose_a_flat_is_one() {
        let g = grid();
        let chi = CutoffProfile::default_profile();
        let s = SurfaceState::zero(g.clone());
        assert_eq!(choose_a(&s, &chi, &g).unwrap(), 1.0);
    }

    #[test]
    fn choose_a_matches_closed_form_grid_max() {
        // h = 0.1 cos(2y): d_z eta = -0.1 * 2 * chi'(2|z|) cos(2y)
        let g = grid();
        let chi = CutoffProfile::default_profile();
        let s = SurfaceState::cosine_mode(g.clone(), 2, 0.1).unwrap();
        let a = choose_a(&s, &chi, &g).unwrap();
        let kv = g.k1[2];
        let mut max_closed: f64 = 0.0;
        for i1 in 0..g.n1 {
            let y = g.horizontal_coord1(i1);
            for iz in 0..g.nz {
                let v = 0.1 * kv * chi.chi_d1(kv * g.z[iz].abs()) * (kv * y).cos();
                max_closed = max_closed.max(v.abs());
            }
        }
        assert!((a - (1.0 + max_closed)).abs() < 1e-12);
    }

    #[test]
    fn choose_a_postcondition_min_j_at_least_one() {
        let g = grid();
        let chi = CutoffProfile::default_profile();
        let h = Array2::from_shape_fn((g.n1, 1), |(i1, _)| {
            let y = g.horizontal_coord1(i1);
            0.2 * (2.0 * y).cos() + 0.1 * (5.0 * y).sin()
        });
        let s = SurfaceState::from_physical(g.clone(), h, 0.0).unwrap();
        let a = choose_a(&s, &chi, &g).unwrap();
        let frame = assemble_frame(&s, a, &chi, g, 0.5).unwrap();
        assert!(frame.min_j >= 1.0 - 1e-12);
    }

    #[test]
    fn flat_frame_has_identity_e() {
        let g = grid();
        let frame = DiffeoFrame::flat(g.clone(), 1.0);
        for iz in 0..g.nz {
            let em = frame.e.at((0, 0, iz));
            for r in 0..3 {
                for c in 0..3 {
                    let expect = if r == c { 1.0 } else { 0.0 };
                    assert!((em[r][c] - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn e_identity_and_positive_definiteness() {
        let g = grid();
        let chi = CutoffProfile::default_profile();
        let h = Array2::from_shape_fn((g.n1, 1), |(i1, _)| {
            let y = g.horizontal_coord1(i1);
            0.05 * (2.0 * y).cos() + 0.02 * (3.0 * y).sin()
        });
        let s = SurfaceState::from_physical(g.clone(), h, 0.0).unwrap();
        let a = choose_a(&s, &chi, &g).unwrap();
        let frame = assemble_frame(&s, a, &chi, g, 0.5).unwrap();
        assert!(frame.e_identity_defect() < 1e-13);
        assert!(frame.min_eig_e > 0.0);
    }

    #[test]
    fn breakdown_reports_location() {
        let g = grid();
        let chi = CutoffProfile::default_profile();
        let s = SurfaceState::cosine_mode(g.clone(), 4, 1.5).unwrap();
        // A too small for this steep surface: must fail, not clamp.
        let err = assemble_frame(&s, 0.05, &chi, g, 0.5).unwrap_err();
        match err {
            Error::DiffeoBreakdown { value, c0, .. } => {
                assert!(value < c0);
            }
            other => panic!("expected breakdown, got {other:?}"),
        }
    }
}
