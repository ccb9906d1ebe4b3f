//! Anisotropic semiclassical weight used by the parabolic symbol calculus.

use crate::scalar::Real;

/// <zeta^eps> = (gamma^2 + tau^2 + |sqrt(eps) xi|^4)^{1/4}.
pub fn anisotropic_weight<S: Real>(gamma: S, tau: S, xi: S, eps: S) -> S {
    let exi2 = eps * xi * xi;
    (gamma * gamma + tau * tau + exi2 * exi2).powf(S::of(0.25))
}
