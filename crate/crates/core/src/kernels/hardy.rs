//! Hardy inequality on the half line: for f(0) = 0,
//! int f^2 / (z^2 (1-z)^2) <= 4 int (d_z f)^2.
//! The constant 4 comes from the integration-by-parts chain
//! A <= 2 sqrt(A) ||d_z f|| applied to A = int f^2 / (z^2 (1-z)^2).

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::fokker_planck::Profile1D;
use super::quad::clenshaw_curtis;

/// Weighted-to-derivative ratio of one profile; errors if f(0) != 0.
pub fn hardy_check<S: Real>(f: &Profile1D<S>) -> Result<S> {
    let trace = f.eval(S::zero()).abs();
    if trace > S::of(1e-12) {
        return Err(Error::Precondition(format!(
            "hardy ratio requires f(0) = 0, got |f(0)| = {trace}"
        )));
    }
    let (lo, _) = f.support;
    if !(lo < S::zero()) {
        return Err(Error::Precondition("profile support must reach below z = 0".into()));
    }
    let tiny = S::of(1e-10);
    let num = clenshaw_curtis(
        &mut |z: S| {
            // removable singularity at z = 0: f(z)/z -> f'(0)
            let q = if z.abs() < tiny { f.eval_d(S::zero()) } else { f.eval(z) / z };
            let w = q / (S::one() - z);
            w * w
        },
        lo,
        S::zero(),
        64,
        16,
    );
    let den = clenshaw_curtis(&mut |z: S| {
        let d = f.eval_d(z);
        d * d
    }, lo, S::zero(), 64, 16);
    if !(den > S::zero()) {
        return Err(Error::Precondition("profile has zero derivative energy".into()));
    }
    Ok(num / den)
}

/// The profile corpus exercised by the verification family.
pub fn standard_corpus<S: Real>() -> Vec<(&'static str, Profile1D<S>)> {
    let pi = S::PI();
    vec![
        (
            "z_exp_z",
            Profile1D::new(
                |z: S| z * z.exp(),
                |z: S| (S::one() + z) * z.exp(),
                (S::of(-30.0), S::zero()),
            ),
        ),
        (
            "sin_cutoff",
            // sin(z) on [-pi, 0] smoothly cut off near the far end
            Profile1D::new(
                move |z: S| {
                    let c = cutoff_factor(z, pi);
                    z.sin() * c
                },
                move |z: S| {
                    let (c, dc) = cutoff_factor_d(z, pi);
                    z.cos() * c + z.sin() * dc
                },
                (-pi, S::zero()),
            ),
        ),
        (
            "quadratic_bump",
            Profile1D::new(
                |z: S| z * (z + S::of(2.0)) * (z + S::of(2.0)),
                |z: S| (z + S::of(2.0)) * (S::of(3.0) * z + S::of(2.0)),
                (S::of(-2.0), S::zero()),
            ),
        ),
    ]
}

fn cutoff_factor<S: Real>(z: S, pi: S) -> S {
    // 1 near z = 0, smoothly down to 0 at z = -pi
    let t = (-z / pi).min(S::one());
    let s = (S::one() - t).max(S::zero());
    s * s * (S::of(3.0) - S::of(2.0) * s)
}

fn cutoff_factor_d<S: Real>(z: S, pi: S) -> (S, S) {
    let t = (-z / pi).min(S::one());
    let s = (S::one() - t).max(S::zero());
    let c = s * s * (S::of(3.0) - S::of(2.0) * s);
    // dc/dz = dc/ds * ds/dz with ds/dz = 1/pi
    let dcds = S::of(6.0) * s * (S::one() - s);
    (c, dcds / pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_ratios_below_four() {
        for (name, f) in standard_corpus::<f64>() {
            let r = hardy_check(&f).unwrap();
            assert!(r <= 4.0, "{name}: ratio {r} > 4");
            assert!(r > 0.0, "{name}: degenerate ratio");
        }
    }

    #[test]
    fn z_exp_z_ratio_stable_under_node_doubling() {
        let f = Profile1D::new(
            |z: f64| z * z.exp(),
            |z: f64| (1.0 + z) * z.exp(),
            (-30.0, 0.0),
        );
        let coarse = hardy_check(&f).unwrap();
        // doubled node count via a manual pass
        let num = clenshaw_curtis(
            &mut |z: f64| {
                let q = if z.abs() < 1e-10 { 1.0 } else { z * z.exp() / z };
                (q / (1.0 - z)).powi(2)
            },
            -30.0,
            0.0,
            128,
            32,
        );
        let den = clenshaw_curtis(
            &mut |z: f64| ((1.0 + z) * z.exp()).powi(2),
            -30.0,
            0.0,
            128,
            32,
        );
        assert!((coarse - num / den).abs() < 1e-9);
    }

    #[test]
    fn nonvanishing_trace_rejected() {
        let f = Profile1D::new(|_z: f64| 1.0, |_z: f64| 0.0, (-2.0, 0.0));
        assert!(matches!(hardy_check(&f), Err(Error::Precondition(_))));
    }
}
