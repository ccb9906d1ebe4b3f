//! Per-mode trace gain for the heat equation on the half line.
//!
//! For d_t f - eps Laplacian f = 0 on z < 0 with boundary data f^b, the
//! Laplace-Fourier solution of one mode is
//! fhat(z) = exp(sqrt(gamma + i tau + eps |xi|^2) z / sqrt(eps)) fhat^b,
//! and the gain ratio
//! R = (gamma + |tau|)^{1/2} ||fhat||^2_{L2_z} / (sqrt(eps) |fhat^b|^2)
//! is bounded by one: a quarter of a time derivative is gained at the price
//! of sqrt(eps).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// The ratio R for one mode, evaluated from the exact integral
/// ||fhat||^2_{L2_z} = sqrt(eps) / (2 Re sqrt(gamma + i tau + eps |xi|^2)).
pub fn heat_trace_gain<S: Real>(gamma: S, tau: S, xi: S, eps: S) -> Result<S> {
    if gamma < S::one() {
        return Err(Error::Domain(format!(
            "heat trace gain needs gamma >= 1, got {gamma}"
        )));
    }
    if !(eps > S::zero() && eps <= S::one()) {
        return Err(Error::Domain(format!(
            "heat trace gain needs eps in (0, 1], got {eps}"
        )));
    }
    let symbol = Complex::new(gamma + eps * xi * xi, tau);
    let re_root = symbol.sqrt().re;
    Ok((gamma + tau.abs()).sqrt() / (S::of(2.0) * re_root))
}

/// Deterministic parameter grid used by the verification family:
/// `n_gamma * n_tau * n_xi * eps_list.len()` modes spanning several decades.
pub fn mode_grid<S: Real>(
    n_gamma: usize,
    n_tau: usize,
    n_xi: usize,
    eps_list: &[S],
) -> Vec<(S, S, S, S)> {
    let mut out = Vec::with_capacity(n_gamma * n_tau * n_xi * eps_list.len());
    for ig in 0..n_gamma {
        // gamma in [1, 10^3], log-spaced
        let t = S::of_usize(ig) / S::of_usize(n_gamma.max(2) - 1);
        let gamma = S::of(10.0).powf(t * S::of(3.0));
        for it in 0..n_tau {
            // tau in [-10^3, 10^3] through a signed quadratic map
            let u = S::of(2.0) * S::of_usize(it) / S::of_usize(n_tau.max(2) - 1) - S::one();
            let tau = u * u.abs() * S::of(1e3);
            for ix in 0..n_xi {
                let s = S::of_usize(ix) / S::of_usize(n_xi.max(2) - 1);
                let xi = s * s * S::of(1e3);
                for &eps in eps_list {
                    out.push((gamma, tau, xi, eps));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::quad::integrate;

    #[test]
    fn gamma_only_mode_is_one_half() {
        // (1, 0, 0): R = sqrt(1) / (2 Re sqrt(1)) = 1/2 exactly
        let r = heat_trace_gain(1.0f64, 0.0, 0.0, 0.3).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tau_dominant_limit_is_sqrt_half() {
        // Re sqrt(i tau) = sqrt(|tau| / 2), so R -> sqrt(2)/2
        let r = heat_trace_gain(1.0f64, 1e8, 0.0, 1.0).unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-6, "{r}");
    }

    #[test]
    fn bounded_by_one_on_mode_grid() {
        let modes = mode_grid(10usize, 10, 10, &[1.0f64, 1e-2, 1e-4]);
        assert!(modes.len() >= 1000);
        for (gamma, tau, xi, eps) in modes {
            let r = heat_trace_gain(gamma, tau, xi, eps).unwrap();
            assert!(
                r <= 1.0 + 1e-14,
                "R = {r} > 1 at ({gamma}, {tau}, {xi}, {eps})"
            );
        }
    }

    #[test]
    fn analytic_l2_matches_quadrature() {
        // cross-check the exact integral against direct quadrature of
        // |exp(sqrt(w) z / sqrt(eps))|^2
        let (gamma, tau, xi, eps) = (2.0f64, 5.0, 3.0, 0.1);
        let w = num_complex::Complex::new(gamma + eps * xi * xi, tau);
        let a = w.sqrt().re;
        let exact = eps.sqrt() / (2.0 * a);
        // integrand decays like exp(2 a z / sqrt(eps)); truncate far out
        let depth = 20.0 * eps.sqrt() / a;
        let (num, _) = integrate(
            &mut |z: f64| (2.0 * a * z / eps.sqrt()).exp(),
            -depth,
            0.0,
            1e-12,
        )
        .unwrap();
        assert!((num - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn domain_errors() {
        assert!(heat_trace_gain(0.5f64, 0.0, 0.0, 0.5).is_err());
        assert!(heat_trace_gain(1.0f64, 0.0, 0.0, 0.0).is_err());
        assert!(heat_trace_gain(1.0f64, 0.0, 0.0, 1.5).is_err());
    }
}
