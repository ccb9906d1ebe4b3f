//! Numerical laboratory for free-surface incompressible flow on a fixed
//! strip: the moving fluid domain is mapped onto {z in [-H, 0]} by a
//! smoothing diffeomorphism, the transformed Navier-Stokes system is
//! advanced by an IMEX spectral scheme, and the analytic kernels used by
//! the underlying estimates are verified numerically.
//!
//! Everything is generic over the scalar type through [`scalar::Real`];
//! the concrete aliases below are what applications normally use.

pub mod error;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod scalar;

pub mod dynamics;
pub mod elliptic;
pub mod function_spaces;
pub mod geometry;
pub mod kernels;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default scalar for production runs.
pub type Scalar = f64;

/// Concrete aliases for the common types at the default precision.
pub type Grid = grid::StripGrid<Scalar>;
pub type Field = ndarray::Array3<Scalar>;
pub type Vector = field::Vec3Field<Scalar>;
pub type Surface = geometry::SurfaceState<Scalar>;
pub type Frame = geometry::DiffeoFrame<Scalar>;
pub type Cutoff = geometry::CutoffProfile<Scalar>;
