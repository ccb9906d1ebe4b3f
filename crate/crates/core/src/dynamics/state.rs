//! Flow state: velocity, surface and frame at one time level.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Vec3Field;
use crate::geometry::{DiffeoFrame, SurfaceState};
use crate::grid::StripGrid;
use crate::scalar::Real;

/// Immutable snapshot of the coupled system. The frame is rebuilt from the
/// surface at every step; diagnostics read snapshots concurrently.
#[derive(Clone)]
pub struct FlowState<S: Real> {
    pub grid: Arc<StripGrid<S>>,
    pub v: Vec3Field<S>,
    pub surface: SurfaceState<S>,
    pub frame: Arc<DiffeoFrame<S>>,
    pub t: S,
    pub eps: S,
}

impl<S: Real> std::fmt::Debug for FlowState<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlowState")
            .field("t", &self.t)
            .field("eps", &self.eps)
            .field("max_v", &self.v.max_abs(&self.grid))
            .field("max_h", &self.surface.max_abs())
            .finish()
    }
}

impl<S: Real> FlowState<S> {
    pub fn check_finite(&self, context: &str) -> Result<()> {
        if !self.v.is_finite() || !self.surface.h.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite {
                context: context.to_string(),
                time: self.t.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }
}
