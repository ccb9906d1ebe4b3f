//! Variable-coefficient elliptic solves on the strip: the Dirichlet
//! problems defining both pressure components and a manufactured-solution
//! verification harness.

pub mod manufactured;
pub mod pressure;
pub mod problem;
pub mod solver;

pub use manufactured::{convergence_study, Dual2, ManufacturedCase};
pub use pressure::{
    euler_pressure_rhs, pressure_euler, pressure_ns, pressure_pair, taylor_coefficient,
    viscous_normal_stress, PressurePair, PressureSettings,
};
pub use problem::{BottomCondition, EllipticProblem, EllipticRhs, SolveReport};
pub use solver::{EllipticOperator, FlatPreconditioner};
