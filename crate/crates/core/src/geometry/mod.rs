//! Smoothing diffeomorphism of the strip: surface extension, frame metric
//! quantities and the transformed differential operators.

pub mod cutoff;
pub mod frame;
pub mod ops;
pub mod surface;

pub use cutoff::CutoffProfile;
pub use frame::{assemble_frame, choose_a, extend_surface, DiffeoFrame, EtaDeriv, MetricE};
pub use ops::{
    apply_dphi, curl_phi, div_phi, div_phi_flux, flux, grad_phi, grad_phi_flux, laplacian_phi,
    strain,
};
pub use surface::SurfaceState;
