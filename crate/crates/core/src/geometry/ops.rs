//! Transformed differential operators on the strip.
//!
//! d_i^phi = d_i - (d_i phi / d_z phi) d_z for horizontal i,
//! d_3^phi = d_z / d_z phi. Horizontal derivatives are spectral, vertical
//! ones use the LGL differentiation matrix of the grid.

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::field::{SymTensorField, Vec3Field};
use crate::scalar::Real;

use super::frame::DiffeoFrame;

/// d_i^phi f for i in {1, 2, 3}.
pub fn apply_dphi<S: Real>(
    f: &Array3<S>,
    direction: usize,
    frame: &DiffeoFrame<S>,
) -> Result<Array3<S>> {
    let grid = &frame.grid;
    grid.check_shape(f)?;
    match direction {
        1 | 2 => {
            let fz = grid.d_vertical(f);
            let fh = grid.d_horizontal(f, direction);
            let slope = if direction == 1 {
                &frame.eta_1
            } else {
                &frame.eta_2
            };
            let (n1, n2, nz) = grid.shape();
            let mut out = fh;
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    for iz in 0..nz {
                        let idx = (i1, i2, iz);
                        out[idx] = out[idx] - slope[idx] / frame.j[idx] * fz[idx];
                    }
                }
            }
            Ok(out)
        }
        3 => {
            let mut out = grid.d_vertical(f);
            out.zip_mut_with(&frame.j, |v, &jj| *v /= jj);
            Ok(out)
        }
        other => Err(Error::InvalidDirection(other)),
    }
}

/// Transformed gradient (d_1^phi f, d_2^phi f, d_3^phi f).
pub fn grad_phi<S: Real>(f: &Array3<S>, frame: &DiffeoFrame<S>) -> Result<Vec3Field<S>> {
    let grid = &frame.grid;
    grid.check_shape(f)?;
    let fz = grid.d_vertical(f);
    let f1 = grid.d_horizontal(f, 1);
    let f2 = grid.d_horizontal(f, 2);
    let (n1, n2, nz) = grid.shape();
    let mut out = Vec3Field::zeros((n1, n2, nz));
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                let inv_j = S::one() / frame.j[idx];
                let dz = fz[idx];
                out.c[0][idx] = f1[idx] - frame.eta_1[idx] * inv_j * dz;
                out.c[1][idx] = f2[idx] - frame.eta_2[idx] * inv_j * dz;
                out.c[2][idx] = dz * inv_j;
            }
        }
    }
    Ok(out)
}

/// Transformed divergence computed as the sum of d_i^phi v_i.
pub fn div_phi<S: Real>(v: &Vec3Field<S>, frame: &DiffeoFrame<S>) -> Result<Array3<S>> {
    let mut out = apply_dphi(&v.c[0], 1, frame)?;
    let d2 = apply_dphi(&v.c[1], 2, frame)?;
    let d3 = apply_dphi(&v.c[2], 3, frame)?;
    out.zip_mut_with(&d2, |a, &b| *a += b);
    out.zip_mut_with(&d3, |a, &b| *a += b);
    Ok(out)
}

/// The contravariant volume flux U = P v.
pub fn flux<S: Real>(v: &Vec3Field<S>, frame: &DiffeoFrame<S>) -> Vec3Field<S> {
    let (n1, n2, nz) = frame.grid.shape();
    let mut u = Vec3Field::zeros((n1, n2, nz));
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                let jj = frame.j[idx];
                u.c[0][idx] = jj * v.c[0][idx];
                u.c[1][idx] = jj * v.c[1][idx];
                u.c[2][idx] = -frame.eta_1[idx] * v.c[0][idx] - frame.eta_2[idx] * v.c[1][idx]
                    + v.c[2][idx];
            }
        }
    }
    u
}

/// Transformed divergence in flux form, (1/d_z phi) div(P v).
pub fn div_phi_flux<S: Real>(v: &Vec3Field<S>, frame: &DiffeoFrame<S>) -> Result<Array3<S>> {
    let grid = &frame.grid;
    let u = flux(v, frame);
    let mut out = grid.d_horizontal(&u.c[0], 1);
    let d2 = grid.d_horizontal(&u.c[1], 2);
    let dz = grid.d_vertical(&u.c[2]);
    out.zip_mut_with(&d2, |a, &b| *a += b);
    out.zip_mut_with(&dz, |a, &b| *a += b);
    out.zip_mut_with(&frame.j, |a, &jj| *a /= jj);
    Ok(out)
}

/// Transformed gradient in flux form, (1/d_z phi) P^T grad q. Algebraically
/// identical to `grad_phi`; kept as the form used by the projection.
pub fn grad_phi_flux<S: Real>(q: &Array3<S>, frame: &DiffeoFrame<S>) -> Result<Vec3Field<S>> {
    let grid = &frame.grid;
    grid.check_shape(q)?;
    let q1 = grid.d_horizontal(q, 1);
    let q2 = grid.d_horizontal(q, 2);
    let qz = grid.d_vertical(q);
    let (n1, n2, nz) = grid.shape();
    let mut out = Vec3Field::zeros((n1, n2, nz));
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                let inv_j = S::one() / frame.j[idx];
                // P^T grad q = (J q1 - eta_1 qz, J q2 - eta_2 qz, qz)
                out.c[0][idx] = q1[idx] - frame.eta_1[idx] * qz[idx] * inv_j;
                out.c[1][idx] = q2[idx] - frame.eta_2[idx] * qz[idx] * inv_j;
                out.c[2][idx] = qz[idx] * inv_j;
            }
        }
    }
    Ok(out)
}

/// Symmetric transformed gradient S^phi v.
pub fn strain<S: Real>(v: &Vec3Field<S>, frame: &DiffeoFrame<S>) -> Result<SymTensorField<S>> {
    let g0 = grad_phi(&v.c[0], frame)?;
    let g1 = grad_phi(&v.c[1], frame)?;
    let g2 = grad_phi(&v.c[2], frame)?;
    let (n1, n2, nz) = frame.grid.shape();
    let mut s = SymTensorField::zeros((n1, n2, nz));
    let half = S::of(0.5);
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                s.s11[idx] = g0.c[0][idx];
                s.s22[idx] = g1.c[1][idx];
                s.s33[idx] = g2.c[2][idx];
                s.s12[idx] = half * (g0.c[1][idx] + g1.c[0][idx]);
                s.s13[idx] = half * (g0.c[2][idx] + g2.c[0][idx]);
                s.s23[idx] = half * (g1.c[2][idx] + g2.c[1][idx]);
            }
        }
    }
    Ok(s)
}

/// Transformed Laplacian (1/d_z phi) div(E grad f), strong collocation form.
pub fn laplacian_phi<S: Real>(f: &Array3<S>, frame: &DiffeoFrame<S>) -> Result<Array3<S>> {
    let grid = &frame.grid;
    grid.check_shape(f)?;
    let f1 = grid.d_horizontal(f, 1);
    let f2 = grid.d_horizontal(f, 2);
    let fz = grid.d_vertical(f);
    let (n1, n2, nz) = grid.shape();
    let mut u1 = Array3::zeros((n1, n2, nz));
    let mut u2 = Array3::zeros((n1, n2, nz));
    let mut u3 = Array3::zeros((n1, n2, nz));
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                let g = frame.e.apply(idx, [f1[idx], f2[idx], fz[idx]]);
                u1[idx] = g[0];
                u2[idx] = g[1];
                u3[idx] = g[2];
            }
        }
    }
    let mut out = grid.d_horizontal(&u1, 1);
    let d2 = grid.d_horizontal(&u2, 2);
    let dz = grid.d_vertical(&u3);
    out.zip_mut_with(&d2, |a, &b| *a += b);
    out.zip_mut_with(&dz, |a, &b| *a += b);
    out.zip_mut_with(&frame.j, |a, &jj| *a /= jj);
    Ok(out)
}

/// Transformed curl (vorticity) of a velocity field.
pub fn curl_phi<S: Real>(v: &Vec3Field<S>, frame: &DiffeoFrame<S>) -> Result<Vec3Field<S>> {
    let g0 = grad_phi(&v.c[0], frame)?;
    let g1 = grad_phi(&v.c[1], frame)?;
    let g2 = grad_phi(&v.c[2], frame)?;
    let (n1, n2, nz) = frame.grid.shape();
    let mut w = Vec3Field::zeros((n1, n2, nz));
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for iz in 0..nz {
                let idx = (i1, i2, iz);
                w.c[0][idx] = g2.c[1][idx] - g1.c[2][idx];
                w.c[1][idx] = g0.c[2][idx] - g2.c[0][idx];
                w.c[2][idx] = g1.c[0][idx] - g0.c[1][idx];
            }
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cutoff::CutoffProfile;
    use crate::geometry::frame::{assemble_frame, choose_a};
    use crate::geometry::surface::SurfaceState;
    use crate::grid::StripGrid;
    use ndarray::Array2;
    use std::sync::Arc;

    fn flat_frame(nz: usize) -> DiffeoFrame<f64> {
        let g = Arc::new(
            StripGrid::new(32, 1, nz, 2.0 * std::f64::consts::PI, 1.0, 2.0).unwrap(),
        );
        DiffeoFrame::flat(g, 1.0)
    }

    fn curved_frame(n1: usize, nz: usize, amp: f64) -> DiffeoFrame<f64> {
        // Single k = 1 mode: the cutoff transition then spans a whole unit
        // of depth and is resolvable at moderate nz.
        let g = Arc::new(
            StripGrid::new(n1, 1, nz, 2.0 * std::f64::consts::PI, 1.0, 2.0).unwrap(),
        );
        let chi = CutoffProfile::default_profile();
        let h = Array2::from_shape_fn((g.n1, 1), |(i1, _)| {
            let y = g.horizontal_coord1(i1);
            amp * y.cos()
        });
        let s = SurfaceState::from_physical(g.clone(), h, 0.0).unwrap();
        let a = choose_a(&s, &chi, &g).unwrap();
        assemble_frame(&s, a, &chi, g, 0.5).unwrap()
    }

    #[test]
    fn flat_frame_dphi_reduces_to_plain_derivatives() {
        let frame = flat_frame(24);
        let g = &frame.grid;
        let f = Array3::from_shape_fn(g.shape(), |(i1, _, iz)| {
            (g.horizontal_coord1(i1)).cos() * g.z[iz].exp()
        });
        let d1 = apply_dphi(&f, 1, &frame).unwrap();
        let d3 = apply_dphi(&f, 3, &frame).unwrap();
        for i1 in (0..g.n1).step_by(5) {
            for iz in 0..g.nz {
                let y = g.horizontal_coord1(i1);
                let z = g.z[iz];
                assert!((d1[[i1, 0, iz]] + y.sin() * z.exp()).abs() < 1e-9);
                assert!((d3[[i1, 0, iz]] - y.cos() * z.exp()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn invalid_direction_errors() {
        let frame = flat_frame(8);
        let f = Array3::zeros(frame.grid.shape());
        assert!(apply_dphi(&f, 0, &frame).is_err());
        assert!(apply_dphi(&f, 4, &frame).is_err());
    }

    #[test]
    fn commutator_vanishes_in_flat_frame() {
        let frame = flat_frame(16);
        let g = &frame.grid;
        let f = Array3::from_shape_fn(g.shape(), |(i1, _, iz)| {
            (2.0 * g.horizontal_coord1(i1)).sin() * (1.0 + g.z[iz]).powi(3)
        });
        let a = apply_dphi(&apply_dphi(&f, 3, &frame).unwrap(), 1, &frame).unwrap();
        let b = apply_dphi(&apply_dphi(&f, 1, &frame).unwrap(), 3, &frame).unwrap();
        let mut diff = a;
        diff.zip_mut_with(&b, |x, &y| *x -= y);
        assert!(g.l2_norm(&diff) < 1e-11);
    }

    #[test]
    fn commutator_converges_under_refinement() {
        // [d1^phi, d3^phi] f -> 0 spectrally for a curved frame.
        let comm_norm = |nz: usize| -> f64 {
            let frame = curved_frame(32, nz, 0.05);
            let g = &frame.grid;
            let f = Array3::from_shape_fn(g.shape(), |(i1, _, iz)| {
                (g.horizontal_coord1(i1)).cos() * (0.8 * g.z[iz]).exp()
            });
            let a = apply_dphi(&apply_dphi(&f, 3, &frame).unwrap(), 1, &frame).unwrap();
            let b = apply_dphi(&apply_dphi(&f, 1, &frame).unwrap(), 3, &frame).unwrap();
            let mut diff = a;
            diff.zip_mut_with(&b, |x, &y| *x -= y);
            g.l2_norm(&diff)
        };
        let coarse = comm_norm(24);
        let fine = comm_norm(48);
        assert!(
            fine < coarse / 8.0,
            "commutator must decay at spectral rate: {coarse} -> {fine}"
        );
    }

    #[test]
    fn divergence_identity_flat_to_rounding() {
        // div^phi v = (1/J) div(P v) holds to rounding in a flat frame.
        let frame = flat_frame(16);
        let g = &frame.grid;
        let mut v = Vec3Field::zeros(g.shape());
        for i1 in 0..g.n1 {
            let y = g.horizontal_coord1(i1);
            for iz in 0..g.nz {
                let z = g.z[iz];
                v.c[0][[i1, 0, iz]] = (2.0 * y).cos() * (1.0 + z);
                v.c[2][[i1, 0, iz]] = y.sin() * z * z;
            }
        }
        let a = div_phi(&v, &frame).unwrap();
        let b = div_phi_flux(&v, &frame).unwrap();
        let mut diff = a;
        diff.zip_mut_with(&b, |x, &y| *x -= y);
        assert!(g.l2_norm(&diff) < 1e-12);
    }

    #[test]
    fn divergence_identity_converges_for_curved_frame() {
        let defect = |n1: usize, nz: usize| -> f64 {
            let frame = curved_frame(n1, nz, 0.05);
            let g = &frame.grid;
            let mut v = Vec3Field::zeros(g.shape());
            for i1 in 0..g.n1 {
                let y = g.horizontal_coord1(i1);
                for iz in 0..g.nz {
                    let z = g.z[iz];
                    v.c[0][[i1, 0, iz]] = (2.0 * y).cos() * (0.7 * z).exp();
                    v.c[2][[i1, 0, iz]] = y.sin() * (z + 0.3 * z * z);
                }
            }
            let a = div_phi(&v, &frame).unwrap();
            let b = div_phi_flux(&v, &frame).unwrap();
            let mut diff = a;
            diff.zip_mut_with(&b, |x, &y| *x -= y);
            g.l2_norm(&diff)
        };
        let coarse = defect(32, 24);
        let fine = defect(64, 48);
        assert!(
            fine < coarse / 8.0,
            "flux-form divergence identity must converge spectrally: {coarse} -> {fine}"
        );
    }

    #[test]
    fn gradient_forms_agree_to_rounding() {
        // grad^phi = (1/J) P^T grad is an exact algebraic identity.
        let frame = curved_frame(32, 16, 0.08);
        let g = &frame.grid;
        let q = Array3::from_shape_fn(g.shape(), |(i1, _, iz)| {
            (g.horizontal_coord1(i1)).sin() * (1.0 + g.z[iz]).powi(2)
        });
        let a = grad_phi(&q, &frame).unwrap();
        let b = grad_phi_flux(&q, &frame).unwrap();
        for k in 0..3 {
            let mut diff = a.c[k].clone();
            diff.zip_mut_with(&b.c[k], |x, &y| *x -= y);
            assert!(g.max_abs(&diff) < 1e-12);
        }
    }

    #[test]
    fn strain_of_rigid_translation_vanishes() {
        let frame = curved_frame(32, 16, 0.05);
        let g = &frame.grid;
        let mut v = Vec3Field::zeros(g.shape());
        v.c[0].fill(0.7);
        let s = strain(&v, &frame).unwrap();
        let mut worst: f64 = 0.0;
        for i1 in 0..g.n1 {
            for iz in 0..g.nz {
                worst = worst.max(s.frobenius_sq((i1, 0, iz)).sqrt());
            }
        }
        assert!(worst < 1e-11);
    }
}
