//! Frequency cutoff profile for the smoothing extension of the surface.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// chi(s), chi'(s), chi''(s) packed together.
pub type CutoffValues<S> = [S; 3];

type CustomFn<S> = Arc<dyn Fn(S) -> CutoffValues<S> + Send + Sync>;

enum Kind<S> {
    /// exp-based C-infinity transition between the plateau and the support edge.
    Bump,
    Custom(CustomFn<S>),
}

/// Smooth, even in its vector argument (radial here), compactly supported
/// cutoff with chi = 1 on [0, r1] and chi = 0 on [r2, inf).
pub struct CutoffProfile<S: Real> {
    pub r1: S,
    pub r2: S,
    kind: Kind<S>,
}

impl<S: Real> Clone for CutoffProfile<S> {
    fn clone(&self) -> Self {
        Self {
            r1: self.r1,
            r2: self.r2,
            kind: match &self.kind {
                Kind::Bump => Kind::Bump,
                Kind::Custom(f) => Kind::Custom(f.clone()),
            },
        }
    }
}

impl<S: Real> std::fmt::Debug for CutoffProfile<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CutoffProfile")
            .field("r1", &self.r1)
            .field("r2", &self.r2)
            .finish()
    }
}

/// sigma(u) = exp(-1/u) for u > 0, extended by zero. Same guard for the
/// derivative factors.
fn sigma<S: Real>(u: S) -> S {
    if u <= S::zero() {
        S::zero()
    } else {
        (-u.recip()).exp()
    }
}

fn sigma_d1<S: Real>(u: S) -> S {
    if u <= S::zero() {
        S::zero()
    } else {
        sigma(u) / (u * u)
    }
}

fn sigma_d2<S: Real>(u: S) -> S {
    if u <= S::zero() {
        S::zero()
    } else {
        let u2 = u * u;
        sigma(u) * (S::one() - S::of(2.0) * u) / (u2 * u2)
    }
}

impl<S: Real> CutoffProfile<S> {
    /// Standard profile: plateau radius `r1`, support radius `r2`.
    pub fn standard(r1: S, r2: S) -> Result<Self> {
        let p = Self {
            r1,
            r2,
            kind: Kind::Bump,
        };
        p.validate()?;
        Ok(p)
    }

    /// Default parameters r1 = 1, r2 = 2.
    pub fn default_profile() -> Self {
        Self::standard(S::one(), S::of(2.0)).expect("default cutoff valid")
    }

    /// User-supplied profile returning chi and its first two derivatives.
    pub fn custom(
        r1: S,
        r2: S,
        f: impl Fn(S) -> CutoffValues<S> + Send + Sync + 'static,
    ) -> Result<Self> {
        let p = Self {
            r1,
            r2,
            kind: Kind::Custom(Arc::new(f)),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn eval(&self, s: S) -> CutoffValues<S> {
        match &self.kind {
            Kind::Custom(f) => f(s),
            Kind::Bump => {
                if s <= self.r1 {
                    return [S::one(), S::zero(), S::zero()];
                }
                if s >= self.r2 {
                    return [S::zero(), S::zero(), S::zero()];
                }
                let width = self.r2 - self.r1;
                let t = (s - self.r1) / width;
                let a = sigma(S::one() - t);
                let b = sigma(t);
                let da = -sigma_d1(S::one() - t);
                let db = sigma_d1(t);
                let dda = sigma_d2(S::one() - t);
                let ddb = sigma_d2(t);
                let denom = a + b;
                let g = a / denom;
                let num1 = da * b - a * db;
                let dg = num1 / (denom * denom);
                let num2 = (dda * b - a * ddb) * denom - S::of(2.0) * num1 * (da + db);
                let ddg = num2 / (denom * denom * denom);
                [g, dg / width, ddg / (width * width)]
            }
        }
    }

    pub fn chi(&self, s: S) -> S {
        self.eval(s)[0]
    }

    pub fn chi_d1(&self, s: S) -> S {
        self.eval(s)[1]
    }

    pub fn chi_d2(&self, s: S) -> S {
        self.eval(s)[2]
    }

    /// Check the profile invariants on a dense sample.
    pub fn validate(&self) -> Result<()> {
        if !(self.r1 >= S::one()) {
            return Err(Error::Domain(format!("cutoff r1 = {} < 1", self.r1)));
        }
        if !(self.r2 > self.r1) {
            return Err(Error::Domain(format!(
                "cutoff needs r2 > r1, got r1 = {}, r2 = {}",
                self.r1, self.r2
            )));
        }
        let samples = 512;
        let span = self.r2 * S::of(1.25);
        let mut prev = S::one() + S::epsilon();
        for i in 0..=samples {
            let s = span * S::of_usize(i) / S::of_usize(samples);
            let [c, _, _] = self.eval(s);
            if c < -S::epsilon() || c > S::one() + S::epsilon() * S::of(4.0) {
                return Err(Error::Domain(format!("cutoff out of [0,1] at s = {s}")));
            }
            if s <= self.r1 && (c - S::one()).abs() > S::epsilon() * S::of(4.0) {
                return Err(Error::Domain(format!("cutoff != 1 on plateau at s = {s}")));
            }
            if s >= self.r2 && c.abs() > S::epsilon() * S::of(4.0) {
                return Err(Error::Domain(format!("cutoff != 0 beyond support at s = {s}")));
            }
            if c > prev + S::of(1e-12) {
                return Err(Error::Domain(format!("cutoff not monotone at s = {s}")));
            }
            prev = c;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        let chi = CutoffProfile::<f64>::default_profile();
        assert_eq!(chi.chi(0.0), 1.0);
        assert_eq!(chi.chi(0.9999), 1.0);
        assert_eq!(chi.chi(2.0), 0.0);
        assert_eq!(chi.chi(5.0), 0.0);
        let mid = chi.chi(1.5);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let chi = CutoffProfile::<f64>::default_profile();
        let eps = 1e-6;
        for &s in &[1.1, 1.3, 1.5, 1.7, 1.9] {
            let [_, d1, d2] = chi.eval(s);
            let fd1 = (chi.chi(s + eps) - chi.chi(s - eps)) / (2.0 * eps);
            let fd2 = (chi.chi(s + eps) - 2.0 * chi.chi(s) + chi.chi(s - eps)) / (eps * eps);
            assert!((d1 - fd1).abs() < 1e-6 * (1.0 + d1.abs()), "s={s}: {d1} vs {fd1}");
            assert!((d2 - fd2).abs() < 3e-4 * (1.0 + d2.abs()), "s={s}: {d2} vs {fd2}");
        }
    }

    #[test]
    fn derivative_vanishes_at_edges() {
        let chi = CutoffProfile::<f64>::default_profile();
        assert_eq!(chi.chi_d1(1.0), 0.0);
        assert_eq!(chi.chi_d1(2.0), 0.0);
        assert!(chi.chi_d1(1.0 + 1e-4).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(CutoffProfile::<f64>::standard(0.5, 2.0).is_err());
        assert!(CutoffProfile::<f64>::standard(1.5, 1.2).is_err());
    }

    #[test]
    fn rejects_invalid_custom_profile() {
        // Not equal to one on the plateau.
        let bad = CutoffProfile::<f64>::custom(1.0, 2.0, |_s| [0.5, 0.0, 0.0]);
        assert!(bad.is_err());
    }
}
