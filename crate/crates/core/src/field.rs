//! Vector fields on the strip grid.

use ndarray::Array3;

use crate::grid::StripGrid;
use crate::scalar::Real;

/// Three Cartesian components on the strip grid. For d = 1 runs the second
/// component is simply zero; every code path treats the three components
/// uniformly.
#[derive(Clone, Debug)]
pub struct Vec3Field<S> {
    pub c: [Array3<S>; 3],
}

impl<S: Real> Vec3Field<S> {
    pub fn zeros(shape: (usize, usize, usize)) -> Self {
        Self {
            c: [
                Array3::zeros(shape),
                Array3::zeros(shape),
                Array3::zeros(shape),
            ],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.c[0].dim()
    }

    pub fn at(&self, idx: (usize, usize, usize)) -> [S; 3] {
        [self.c[0][idx], self.c[1][idx], self.c[2][idx]]
    }

    pub fn set(&mut self, idx: (usize, usize, usize), v: [S; 3]) {
        self.c[0][idx] = v[0];
        self.c[1][idx] = v[1];
        self.c[2][idx] = v[2];
    }

    pub fn axpy(&mut self, alpha: S, other: &Self) {
        for k in 0..3 {
            self.c[k].zip_mut_with(&other.c[k], |a, &b| *a += alpha * b);
        }
    }

    pub fn scale(&mut self, alpha: S) {
        for k in 0..3 {
            self.c[k].mapv_inplace(|a| a * alpha);
        }
    }

    pub fn max_abs(&self, grid: &StripGrid<S>) -> S {
        self.c
            .iter()
            .map(|f| grid.max_abs(f))
            .fold(S::zero(), |m, v| m.max(v))
    }

    /// L2 norm of the vector field with the flat measure.
    pub fn l2_norm(&self, grid: &StripGrid<S>) -> S {
        let mut acc = S::zero();
        for k in 0..3 {
            let n = grid.l2_norm(&self.c[k]);
            acc += n * n;
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|f| f.iter().all(|v| v.is_finite()))
    }
}

/// Symmetric 3x3 tensor field (six independent components).
#[derive(Clone, Debug)]
pub struct SymTensorField<S> {
    pub s11: Array3<S>,
    pub s22: Array3<S>,
    pub s33: Array3<S>,
    pub s12: Array3<S>,
    pub s13: Array3<S>,
    pub s23: Array3<S>,
}

impl<S: Real> SymTensorField<S> {
    pub fn zeros(shape: (usize, usize, usize)) -> Self {
        Self {
            s11: Array3::zeros(shape),
            s22: Array3::zeros(shape),
            s33: Array3::zeros(shape),
            s12: Array3::zeros(shape),
            s13: Array3::zeros(shape),
            s23: Array3::zeros(shape),
        }
    }

    pub fn at(&self, idx: (usize, usize, usize)) -> [[S; 3]; 3] {
        [
            [self.s11[idx], self.s12[idx], self.s13[idx]],
            [self.s12[idx], self.s22[idx], self.s23[idx]],
            [self.s13[idx], self.s23[idx], self.s33[idx]],
        ]
    }

    /// Frobenius inner product |S|^2 at one point.
    pub fn frobenius_sq(&self, idx: (usize, usize, usize)) -> S {
        let two = S::of(2.0);
        self.s11[idx] * self.s11[idx]
            + self.s22[idx] * self.s22[idx]
            + self.s33[idx] * self.s33[idx]
            + two * (self.s12[idx] * self.s12[idx]
                + self.s13[idx] * self.s13[idx]
                + self.s23[idx] * self.s23[idx])
    }

    /// Matrix-vector product (S n) at one point.
    pub fn apply(&self, idx: (usize, usize, usize), n: [S; 3]) -> [S; 3] {
        let m = self.at(idx);
        [
            m[0][0] * n[0] + m[0][1] * n[1] + m[0][2] * n[2],
            m[1][0] * n[0] + m[1][1] * n[1] + m[1][2] * n[2],
            m[2][0] * n[0] + m[2][1] * n[1] + m[2][2] * n[2],
        ]
    }
}
