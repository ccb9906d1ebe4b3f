//! Manufactured-solution verification harness.
//!
//! A smooth analytic frame phi = A z + b cos(y) e^z and an exact solution
//! rho* = sin(y) z e^z are differentiated with forward-mode second-order
//! dual numbers, so the coefficient field E and the right-hand side
//! -div(E grad rho*) carry no discretization error at the nodes. The dual
//! arithmetic is independent of the spectral machinery it verifies.

use std::sync::Arc;

use ndarray::{Array2, Array3};

use crate::error::Result;
use crate::geometry::frame::MetricE;
use crate::grid::StripGrid;
use crate::scalar::Real;

use super::problem::{BottomCondition, EllipticProblem, EllipticRhs};
use super::solver::{EllipticOperator, FlatPreconditioner};

/// Second-order two-variable dual number: value, gradient (y, z) and the
/// symmetric Hessian (yy, yz, zz).
#[derive(Clone, Copy, Debug)]
pub struct Dual2<S> {
    pub v: S,
    pub dy: S,
    pub dz: S,
    pub dyy: S,
    pub dyz: S,
    pub dzz: S,
}

impl<S: Real> Dual2<S> {
    pub fn constant(v: S) -> Self {
        Self {
            v,
            dy: S::zero(),
            dz: S::zero(),
            dyy: S::zero(),
            dyz: S::zero(),
            dzz: S::zero(),
        }
    }

    pub fn var_y(y: S) -> Self {
        Self {
            v: y,
            dy: S::one(),
            dz: S::zero(),
            dyy: S::zero(),
            dyz: S::zero(),
            dzz: S::zero(),
        }
    }

    pub fn var_z(z: S) -> Self {
        Self {
            v: z,
            dy: S::zero(),
            dz: S::one(),
            dyy: S::zero(),
            dyz: S::zero(),
            dzz: S::zero(),
        }
    }

    fn chain(self, f0: S, f1: S, f2: S) -> Self {
        Self {
            v: f0,
            dy: f1 * self.dy,
            dz: f1 * self.dz,
            dyy: f2 * self.dy * self.dy + f1 * self.dyy,
            dyz: f2 * self.dy * self.dz + f1 * self.dyz,
            dzz: f2 * self.dz * self.dz + f1 * self.dzz,
        }
    }

    pub fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos(), -self.v.sin())
    }

    pub fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin(), -self.v.cos())
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn recip(self) -> Self {
        let r = S::one() / self.v;
        self.chain(r, -r * r, S::of(2.0) * r * r * r)
    }
}

impl<S: Real> std::ops::Add for Dual2<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            dy: self.dy + o.dy,
            dz: self.dz + o.dz,
            dyy: self.dyy + o.dyy,
            dyz: self.dyz + o.dyz,
            dzz: self.dzz + o.dzz,
        }
    }
}

impl<S: Real> std::ops::Sub for Dual2<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            v: self.v - o.v,
            dy: self.dy - o.dy,
            dz: self.dz - o.dz,
            dyy: self.dyy - o.dyy,
            dyz: self.dyz - o.dyz,
            dzz: self.dzz - o.dzz,
        }
    }
}

impl<S: Real> std::ops::Mul for Dual2<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let two = S::of(2.0);
        Self {
            v: self.v * o.v,
            dy: self.dy * o.v + self.v * o.dy,
            dz: self.dz * o.v + self.v * o.dz,
            dyy: self.dyy * o.v + two * self.dy * o.dy + self.v * o.dyy,
            dyz: self.dyz * o.v + self.dy * o.dz + self.dz * o.dy + self.v * o.dyz,
            dzz: self.dzz * o.v + two * self.dz * o.dz + self.v * o.dzz,
        }
    }
}

impl<S: Real> std::ops::Div for Dual2<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<S: Real> std::ops::Neg for Dual2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::constant(S::zero()) - self
    }
}

/// One manufactured case on an (n1 x nz) grid.
pub struct ManufacturedCase<S: Real> {
    pub grid: Arc<StripGrid<S>>,
    pub e: MetricE<S>,
    pub a_flat: S,
    pub rhs: Array3<S>,
    pub exact: Array3<S>,
    pub top: Array2<S>,
    pub bottom: Array2<S>,
}

impl<S: Real> ManufacturedCase<S> {
    /// Frame amplitude `amp` must stay below A = 1 for positivity.
    pub fn new(n1: usize, nz: usize, amp: S) -> Result<Self> {
        let grid = Arc::new(StripGrid::new(
            n1,
            1,
            nz,
            S::of(2.0) * S::PI(),
            S::one(),
            S::of(2.0),
        )?)
        ;
        let a_flat = S::one();

        let eta = |y: Dual2<S>, z: Dual2<S>| -> Dual2<S> {
            Dual2::constant(amp) * y.cos() * z.exp()
        };
        let rho_star = |y: Dual2<S>, z: Dual2<S>| -> Dual2<S> { y.sin() * z * z.exp() };

        let shape = grid.shape();
        let mut e = MetricE {
            e11: Array3::zeros(shape),
            e22: Array3::zeros(shape),
            e33: Array3::zeros(shape),
            e13: Array3::zeros(shape),
            e23: Array3::zeros(shape),
        };
        let mut rhs = Array3::zeros(shape);
        let mut exact = Array3::zeros(shape);
        let mut top = Array2::zeros((grid.n1, grid.n2));
        let mut bottom = Array2::zeros((grid.n1, grid.n2));

        let one = Dual2::constant(S::one());
        for i1 in 0..grid.n1 {
            let yv = grid.horizontal_coord1(i1);
            for iz in 0..grid.nz {
                let zv = grid.z[iz];
                let y = Dual2::var_y(yv);
                let z = Dual2::var_z(zv);
                let eta_d = eta(y, z);
                // J = A + d_z eta as a dual quantity, via phi = A z + eta
                let j = Dual2 {
                    v: a_flat + eta_d.dz,
                    dy: eta_d.dyz,
                    dz: eta_d.dzz,
                    dyy: S::zero(),
                    dyz: S::zero(),
                    dzz: S::zero(),
                };
                // eta_y as a dual quantity with first derivatives
                let eta_y = Dual2 {
                    v: eta_d.dy,
                    dy: eta_d.dyy,
                    dz: eta_d.dyz,
                    dyy: S::zero(),
                    dyz: S::zero(),
                    dzz: S::zero(),
                };
                let e11 = j;
                let e13 = -eta_y;
                let e33 = (one + eta_y * eta_y) / j;

                let rho = rho_star(y, z);
                // -div(E grad rho) expanded with the product rule; only
                // first derivatives of E entries appear.
                let divergence = e11.dy * rho.dy
                    + e11.v * rho.dyy
                    + e13.dy * rho.dz
                    + e13.v * rho.dyz
                    + e13.dz * rho.dy
                    + e13.v * rho.dyz
                    + e33.dz * rho.dz
                    + e33.v * rho.dzz;

                let idx = (i1, 0, iz);
                e.e11[idx] = e11.v;
                e.e22[idx] = e11.v;
                e.e33[idx] = e33.v;
                e.e13[idx] = e13.v;
                e.e23[idx] = S::zero();
                rhs[idx] = -divergence;
                exact[idx] = rho.v;
                if iz == 0 {
                    top[[i1, 0]] = rho.v;
                }
                if iz == grid.nz - 1 {
                    bottom[[i1, 0]] = rho.v;
                }
            }
        }

        Ok(Self {
            grid,
            e,
            a_flat,
            rhs,
            exact,
            top,
            bottom,
        })
    }

    /// Solve and return the L2 error against the exact solution.
    pub fn solve_error(&self, tol: S, max_iter: usize) -> Result<S> {
        let bottom = BottomCondition::DirichletData(self.bottom.clone());
        let precond = Arc::new(FlatPreconditioner::new(
            self.grid.clone(),
            self.a_flat,
            &bottom,
        )?);
        let op = EllipticOperator::new(self.grid.clone(), &self.e, precond)?;
        let problem = EllipticProblem {
            rhs: EllipticRhs::Plain(self.rhs.clone()),
            top_data: self.top.clone(),
            bottom,
        };
        let (rho, _) = op.solve(&problem, tol, max_iter)?;
        let mut diff = rho;
        diff.zip_mut_with(&self.exact, |a, &b| *a -= b);
        Ok(self.grid.l2_norm(&diff))
    }
}

/// L2 errors for a sequence of (n1, nz) sizes; used by the acceptance
/// suite's convergence check.
pub fn convergence_study<S: Real>(
    sizes: &[(usize, usize)],
    amp: S,
    tol: S,
    max_iter: usize,
) -> Result<Vec<S>> {
    sizes
        .iter()
        .map(|&(n1, nz)| ManufacturedCase::new(n1, nz, amp)?.solve_error(tol, max_iter))
        .collect()
}
