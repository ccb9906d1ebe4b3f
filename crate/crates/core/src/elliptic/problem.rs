//! Problem description for the variable-coefficient Dirichlet solves.

use ndarray::{Array2, Array3};

use crate::field::Vec3Field;
use crate::scalar::Real;

/// Source term: either div F (weak divergence form) or a plain density.
#[derive(Clone, Debug)]
pub enum EllipticRhs<S> {
    /// -div(E grad rho) = div F, assembled weakly as -<F, grad w>.
    DivergenceForm(Vec3Field<S>),
    /// -div(E grad rho) = f.
    Plain(Array3<S>),
}

/// Bottom boundary condition at z = -H. The homogeneous Neumann variant is
/// the natural (conormal) condition of the weak form.
#[derive(Clone, Debug)]
pub enum BottomCondition<S> {
    DirichletZero,
    NeumannZero,
    /// Inhomogeneous Dirichlet values, used by the manufactured-solution
    /// harness.
    DirichletData(Array2<S>),
}

impl<S: Real> BottomCondition<S> {
    pub fn is_dirichlet(&self) -> bool {
        !matches!(self, BottomCondition::NeumannZero)
    }
}

/// One Dirichlet problem -div(E grad rho) = rhs, rho(z=0) = top_data.
#[derive(Clone, Debug)]
pub struct EllipticProblem<S> {
    pub rhs: EllipticRhs<S>,
    pub top_data: Array2<S>,
    pub bottom: BottomCondition<S>,
}

/// Convergence report of one solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveReport<S> {
    pub iterations: usize,
    /// L2 norm of the strong-form residual at interior nodes.
    pub residual: S,
    /// L2 norm of the right-hand side in the same metric (for context).
    pub rhs_norm: S,
}
