//! Discrete realizations of the norms used by the a priori estimates:
//! fractional Sobolev norms on the boundary, conormal Sobolev norms on the
//! strip, and the anisotropic semiclassical weight.

pub mod multi_index;
pub mod norms;
pub mod weight;

pub use multi_index::ConormalMultiIndex;
pub use norms::{
    boundary_norm, boundary_norm_spec, conormal_derivative, conormal_norm, conormal_pack,
    conormal_sup_norm, em_norm, tangential_norm, NormReport,
};
pub use weight::anisotropic_weight;
