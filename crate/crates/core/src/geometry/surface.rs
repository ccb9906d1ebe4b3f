//! Free-surface elevation on the periodic horizontal grid.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex;

use crate::error::Result;
use crate::grid::StripGrid;
use crate::scalar::Real;

/// Elevation h with its spectral coefficients, at a fixed time.
#[derive(Clone)]
pub struct SurfaceState<S: Real> {
    pub grid: Arc<StripGrid<S>>,
    pub h: Array2<S>,
    pub h_hat: Array2<Complex<S>>,
    pub t: S,
}

impl<S: Real> std::fmt::Debug for SurfaceState<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceState")
            .field("t", &self.t)
            .field("max_h", &self.h.iter().fold(S::zero(), |m, &v| m.max(v.abs())))
            .finish()
    }
}

impl<S: Real> SurfaceState<S> {
    pub fn from_physical(grid: Arc<StripGrid<S>>, h: Array2<S>, t: S) -> Result<Self> {
        if h.dim() != (grid.n1, grid.n2) {
            return Err(crate::error::Error::ShapeMismatch {
                expected: (grid.n1, grid.n2, 1),
                got: (h.dim().0, h.dim().1, 1),
            });
        }
        let h_hat = grid.forward_surface(&h);
        Ok(Self { grid, h, h_hat, t })
    }

    pub fn zero(grid: Arc<StripGrid<S>>) -> Self {
        let h = Array2::zeros((grid.n1, grid.n2));
        let h_hat = Array2::zeros((grid.n1, grid.n2));
        Self {
            grid,
            h,
            h_hat,
            t: S::zero(),
        }
    }

    /// Single-mode elevation a * cos(k1 m y1) used by most experiments.
    pub fn cosine_mode(grid: Arc<StripGrid<S>>, mode: usize, amplitude: S) -> Result<Self> {
        let h = Array2::from_shape_fn((grid.n1, grid.n2), |(i1, _)| {
            let y = grid.horizontal_coord1(i1);
            amplitude * (grid.k1[mode] * y).cos()
        });
        Self::from_physical(grid, h, S::zero())
    }

    /// Largest deviation from Hermitian symmetry of the coefficients
    /// (zero to rounding whenever h is real).
    pub fn hermitian_defect(&self) -> S {
        let (n1, n2) = (self.grid.n1, self.grid.n2);
        let mut worst = S::zero();
        for m1 in 0..n1 {
            for m2 in 0..n2 {
                let c = self.h_hat[[m1, m2]];
                let c_mirror = self.h_hat[[(n1 - m1) % n1, (n2 - m2) % n2]];
                let defect = (c - c_mirror.conj()).norm();
                worst = worst.max(defect);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> S {
        self.h.iter().fold(S::zero(), |m, &v| m.max(v.abs()))
    }
}
