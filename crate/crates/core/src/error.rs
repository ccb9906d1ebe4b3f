//! Crate-wide error type.

use thiserror::Error;

/// Location of a grid node, reported by pointwise failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLocation {
    pub i1: usize,
    pub i2: usize,
    pub iz: usize,
}

impl std::fmt::Display for GridLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(i1={}, i2={}, iz={})", self.i1, self.i2, self.iz)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("field shape {got:?} does not match grid shape {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },

    #[error("invalid direction index {0} (expected 1..=3)")]
    InvalidDirection(usize),

    #[error("diffeomorphism breakdown: dz_phi = {value} < c0 = {c0} at {location}")]
    DiffeoBreakdown {
        value: f64,
        c0: f64,
        location: GridLocation,
    },

    #[error("elliptic setup: coefficient matrix not positive definite (min eigenvalue {min_eig} at {location})")]
    IndefiniteCoefficients { min_eig: f64, location: GridLocation },

    #[error("elliptic solve did not converge: residual {residual:e} > tol {tol:e} after {iterations} iterations")]
    NoConvergence {
        residual: f64,
        tol: f64,
        iterations: usize,
    },

    #[error("non-finite value detected in {context} at t = {time}")]
    NonFinite { context: String, time: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature failed to settle: estimated error {err:e} > {tol:e}")]
    Quadrature { err: f64, tol: f64 },

    #[error("symmetrizer search failed: no delta on the grid satisfies both inequalities with kappa >= {kappa_min}")]
    SymmetrizerSearch { kappa_min: f64 },

    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("checkpoint format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
