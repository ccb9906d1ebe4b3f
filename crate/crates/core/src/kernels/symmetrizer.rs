//! Symbolic symmetrizer for the parabolic boundary system.
//!
//! The second-order symbol is rewritten as the first-order system
//! sqrt(eps) d_z U = <zeta> A(a, zeta~) U with
//!
//!   A = [[0, 1], [(a0/a33)(gamma~ + i tau~) + A_y(a, xi~), A_z(a, xi~)]],
//!
//! A_y = sum_{ij<=2} (a_ij/a33) xi_i xi_j,  A_z = -2 sum_k (a_k3/a33) i xi_k.
//! On the compact parameter set the eigenvalues split off the imaginary
//! axis, and S = (P^-1)* diag(1, -delta) P^-1 with P the eigenbasis
//! satisfies S A + (S A)* >= kappa Id and S + Gamma* Gamma >= kappa Id for
//! small enough delta; delta is found once per parameterization by grid
//! search.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{complex_quadratic_roots, herm2_min_eigenvalue, sym3_eigenvalues};
use crate::scalar::Real;

/// Bounds of the compact parameter set: a0 >= m, a33 >= m, |a|_F <= M,
/// (a_ij) >= c0 Id.
#[derive(Debug, Clone, Copy)]
pub struct CompactSetParams<S> {
    pub m: S,
    pub big_m: S,
    pub c0: S,
}

impl<S: Real> Default for CompactSetParams<S> {
    fn default() -> Self {
        Self {
            m: S::of(0.5),
            big_m: S::of(4.0),
            c0: S::of(0.25),
        }
    }
}

/// One admissible symbol point: a0, the symmetric matrix a, and the
/// quasi-homogeneous frequency zeta~ = (gamma~, tau~, xi~) on the quartic
/// sphere gamma~^2 + tau~^2 + |xi~|^4 = 1 with gamma~ >= 0.
#[derive(Debug, Clone, Copy)]
pub struct ParabolicSymbolPoint<S> {
    pub a0: S,
    pub a: [[S; 3]; 3],
    pub gamma: S,
    pub tau: S,
    pub xi: [S; 2],
}

impl<S: Real> ParabolicSymbolPoint<S> {
    /// Validate membership in K x S_+.
    pub fn new(
        a0: S,
        a: [[S; 3]; 3],
        gamma: S,
        tau: S,
        xi: [S; 2],
        params: &CompactSetParams<S>,
    ) -> Result<Self> {
        let p = Self { a0, a, gamma, tau, xi };
        p.validate(params)?;
        Ok(p)
    }

    pub fn validate(&self, params: &CompactSetParams<S>) -> Result<()> {
        let sym_defect = (self.a[0][1] - self.a[1][0])
            .abs()
            .max((self.a[0][2] - self.a[2][0]).abs())
            .max((self.a[1][2] - self.a[2][1]).abs());
        if sym_defect > S::of(1e-12) {
            return Err(Error::Precondition("a must be symmetric".into()));
        }
        if self.a0 < params.m || self.a[2][2] < params.m {
            return Err(Error::Precondition(format!(
                "need a0, a33 >= m = {}, got a0 = {}, a33 = {}",
                params.m, self.a0, self.a[2][2]
            )));
        }
        let frob = {
            let mut acc = S::zero();
            for r in 0..3 {
                for c in 0..3 {
                    acc += self.a[r][c] * self.a[r][c];
                }
            }
            acc.sqrt()
        };
        if frob > params.big_m * (S::one() + S::of(1e-12)) {
            return Err(Error::Precondition(format!(
                "|a| = {frob} exceeds M = {}",
                params.big_m
            )));
        }
        let min_eig = sym3_eigenvalues(&self.a)[0];
        if min_eig < params.c0 - S::of(1e-12) {
            return Err(Error::Precondition(format!(
                "min eig(a) = {min_eig} below c0 = {}",
                params.c0
            )));
        }
        if self.gamma < S::zero() {
            return Err(Error::Precondition("gamma~ must be nonnegative".into()));
        }
        let xi2 = self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1];
        let sphere = self.gamma * self.gamma + self.tau * self.tau + xi2 * xi2;
        if (sphere - S::one()).abs() > S::of(1e-8) {
            return Err(Error::Precondition(format!(
                "zeta~ off the quartic sphere: {sphere}"
            )));
        }
        Ok(())
    }

    /// The 2x2 system matrix A(a, zeta~).
    pub fn system_matrix(&self) -> [[Complex<S>; 2]; 2] {
        let a33 = self.a[2][2];
        let mut a_y = S::zero();
        for i in 0..2 {
            for j in 0..2 {
                a_y += self.a[i][j] / a33 * self.xi[i] * self.xi[j];
            }
        }
        let mut a_z_im = S::zero();
        for k in 0..2 {
            a_z_im += -S::of(2.0) * self.a[k][2] / a33 * self.xi[k];
        }
        let c = Complex::new(
            self.a0 / a33 * self.gamma + a_y,
            self.a0 / a33 * self.tau,
        );
        [
            [Complex::new(S::zero(), S::zero()), Complex::new(S::one(), S::zero())],
            [c, Complex::new(S::zero(), a_z_im)],
        ]
    }
}

/// Output of one symmetrizer construction.
#[derive(Debug, Clone)]
pub struct SymmetrizerResult<S> {
    pub mu_plus: Complex<S>,
    pub mu_minus: Complex<S>,
    /// Eigenbasis P (columns are the eigenvectors (1, mu)).
    pub p: [[Complex<S>; 2]; 2],
    /// Hermitian symmetrizer S.
    pub s: [[Complex<S>; 2]; 2],
    /// Joint positivity margin achieved at the chosen delta.
    pub kappa: S,
    pub delta: S,
}

type M2<S> = [[Complex<S>; 2]; 2];

fn mat_mul<S: Real>(a: &M2<S>, b: &M2<S>) -> M2<S> {
    let mut out = [[Complex::new(S::zero(), S::zero()); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn adjoint<S: Real>(a: &M2<S>) -> M2<S> {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn hermitian_min_eig<S: Real>(h: &M2<S>) -> S {
    herm2_min_eigenvalue(h[0][0].re, h[0][1], h[1][1].re)
}

/// Positivity margin min(lambda_min(S A + (S A)*), lambda_min(S + G* G))
/// for a given delta.
fn kappa_for_delta<S: Real>(
    p_inv: &M2<S>,
    a: &M2<S>,
    delta: S,
) -> (S, M2<S>) {
    let zero = Complex::new(S::zero(), S::zero());
    let d = [[Complex::new(S::one(), S::zero()), zero], [zero, Complex::new(-delta, S::zero())]];
    let s = mat_mul(&adjoint(p_inv), &mat_mul(&d, p_inv));
    let sa = mat_mul(&s, a);
    let h1 = {
        let sa_adj = adjoint(&sa);
        [
            [sa[0][0] + sa_adj[0][0], sa[0][1] + sa_adj[0][1]],
            [sa[1][0] + sa_adj[1][0], sa[1][1] + sa_adj[1][1]],
        ]
    };
    // Gamma* Gamma = [[1, 0], [0, 0]]
    let h2 = [
        [s[0][0] + Complex::new(S::one(), S::zero()), s[0][1]],
        [s[1][0], s[1][1]],
    ];
    (hermitian_min_eig(&h1).min(hermitian_min_eig(&h2)), s)
}

/// Build the symmetrizer at one point: eigen-split, eigenbasis, and the
/// largest delta on the grid achieving kappa >= kappa_min for both
/// inequalities.
pub fn symmetrizer<S: Real>(
    point: &ParabolicSymbolPoint<S>,
    delta_grid: &[S],
    kappa_min: S,
) -> Result<SymmetrizerResult<S>> {
    let a = point.system_matrix();
    // characteristic polynomial mu^2 - tr mu + det with tr = A_z,
    // det = -((a0/a33)(gamma~ + i tau~) + A_y)
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let (r1, r2) = complex_quadratic_roots(-tr, det);
    let (mu_plus, mu_minus) = if r1.re >= r2.re { (r1, r2) } else { (r2, r1) };
    if !(mu_plus.re > S::zero() && mu_minus.re < S::zero()) {
        return Err(Error::SymmetrizerSearch {
            kappa_min: kappa_min.to_f64().unwrap_or(f64::NAN),
        });
    }

    let one = Complex::new(S::one(), S::zero());
    let p = [[one, one], [mu_plus, mu_minus]];
    let det_p = mu_minus - mu_plus;
    let p_inv = [
        [mu_minus / det_p, -one / det_p],
        [-mu_plus / det_p, one / det_p],
    ];

    let mut sorted: Vec<S> = delta_grid.to_vec();
    sorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
    for &delta in &sorted {
        if !(delta > S::zero()) {
            continue;
        }
        let (kappa, s) = kappa_for_delta(&p_inv, &a, delta);
        if kappa >= kappa_min {
            return Ok(SymmetrizerResult {
                mu_plus,
                mu_minus,
                p,
                s,
                kappa,
                delta,
            });
        }
    }
    Err(Error::SymmetrizerSearch {
        kappa_min: kappa_min.to_f64().unwrap_or(f64::NAN),
    })
}

/// Default delta search grid: two decades below 1.
pub fn default_delta_grid<S: Real>() -> Vec<S> {
    (0..24)
        .map(|i| S::of(0.8f64.powi(i)))
        .collect()
}

/// Verify the family on a point sample with one global delta, matching the
/// compactness structure of the construction: the largest grid delta for
/// which every point satisfies both inequalities with kappa >= kappa_min.
pub struct FamilyReport<S> {
    pub global_delta: S,
    pub min_kappa: S,
    /// Smallest |Re mu| over the sample (distance to the imaginary axis).
    pub min_re_gap: S,
    pub points: usize,
}

pub fn verify_family<S: Real>(
    points: &[ParabolicSymbolPoint<S>],
    delta_grid: &[S],
    kappa_min: S,
) -> Result<FamilyReport<S>> {
    if points.is_empty() {
        return Err(Error::Precondition("empty sample".into()));
    }
    let mut min_re_gap = S::infinity();
    let mut bases = Vec::with_capacity(points.len());
    for pt in points {
        let a = pt.system_matrix();
        let tr = a[0][0] + a[1][1];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let (r1, r2) = complex_quadratic_roots(-tr, det);
        let (mu_p, mu_m) = if r1.re >= r2.re { (r1, r2) } else { (r2, r1) };
        if !(mu_p.re > S::zero() && mu_m.re < S::zero()) {
            return Err(Error::SymmetrizerSearch {
                kappa_min: kappa_min.to_f64().unwrap_or(f64::NAN),
            });
        }
        min_re_gap = min_re_gap.min(mu_p.re.min(-mu_m.re));
        let one = Complex::new(S::one(), S::zero());
        let det_p = mu_m - mu_p;
        let p_inv = [
            [mu_m / det_p, -one / det_p],
            [-mu_p / det_p, one / det_p],
        ];
        bases.push((p_inv, a));
    }

    let mut sorted: Vec<S> = delta_grid.to_vec();
    sorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
    for &delta in &sorted {
        if !(delta > S::zero()) {
            continue;
        }
        let mut min_kappa = S::infinity();
        let mut all_pass = true;
        for (p_inv, a) in &bases {
            let (kappa, _) = kappa_for_delta(p_inv, a, delta);
            min_kappa = min_kappa.min(kappa);
            if kappa < kappa_min {
                all_pass = false;
                break;
            }
        }
        if all_pass {
            return Ok(FamilyReport {
                global_delta: delta,
                min_kappa,
                min_re_gap,
                points: points.len(),
            });
        }
    }
    Err(Error::SymmetrizerSearch {
        kappa_min: kappa_min.to_f64().unwrap_or(f64::NAN),
    })
}

/// Deterministic Sobol sample of the compact set: candidates are drawn from
/// the sequence and the first `n` members passing validation are kept.
pub fn sample_compact_set<S: Real>(
    params: &CompactSetParams<S>,
    n: usize,
    seed: u32,
) -> Result<Vec<ParabolicSymbolPoint<S>>> {
    let mut out = Vec::with_capacity(n);
    let mut index = 0u32;
    let lambda_max = params.big_m / S::of(3.0f64.sqrt()) * S::of(0.999);
    while out.len() < n {
        if index > 500_000 {
            return Err(Error::Domain(
                "compact-set sampling exhausted its candidate budget".into(),
            ));
        }
        let at = index;
        index += 1;
        let u = |dim: u32| -> S { S::of(sobol_burley::sample(at, dim, seed) as f64) };

        let a0 = params.m + u(0) * (params.big_m - params.m) * S::of(0.5);
        // eigenvalues in [c0, M/sqrt(3)) keep |a|_F <= M and min eig >= c0
        let lam = [
            params.c0 + u(1) * (lambda_max - params.c0),
            params.c0 + u(2) * (lambda_max - params.c0),
            params.c0 + u(3) * (lambda_max - params.c0),
        ];
        let two_pi = S::of(2.0) * S::PI();
        let (t1, t2, t3) = (two_pi * u(4), two_pi * u(5), two_pi * u(6));
        let a = rotated_diag(lam, t1, t2, t3);

        // quasi-homogeneous normalization onto the quartic sphere
        let wg = u(7);
        let wt = S::of(2.0) * u(8) - S::one();
        let wx = [S::of(2.0) * u(9) - S::one(), S::of(2.0) * u(10) - S::one()];
        let wx2 = wx[0] * wx[0] + wx[1] * wx[1];
        let norm = wg * wg + wt * wt + wx2 * wx2;
        if norm < S::of(1e-6) {
            continue;
        }
        let lambda = S::one() / norm.sqrt();
        let gamma = lambda * wg;
        let tau = lambda * wt;
        let sq = lambda.sqrt();
        let xi = [sq * wx[0], sq * wx[1]];

        if let Ok(p) = ParabolicSymbolPoint::new(a0, a, gamma, tau, xi, params) {
            out.push(p);
        }
    }
    Ok(out)
}

fn rotated_diag<S: Real>(lam: [S; 3], t1: S, t2: S, t3: S) -> [[S; 3]; 3] {
    // R = Rz(t1) Ry(t2) Rz(t3), a = R diag(lam) R^T
    let rz = |t: S| -> [[S; 3]; 3] {
        [
            [t.cos(), -t.sin(), S::zero()],
            [t.sin(), t.cos(), S::zero()],
            [S::zero(), S::zero(), S::one()],
        ]
    };
    let ry = |t: S| -> [[S; 3]; 3] {
        [
            [t.cos(), S::zero(), t.sin()],
            [S::zero(), S::one(), S::zero()],
            [-t.sin(), S::zero(), t.cos()],
        ]
    };
    let mul = |a: &[[S; 3]; 3], b: &[[S; 3]; 3]| -> [[S; 3]; 3] {
        let mut out = [[S::zero(); 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                for k in 0..3 {
                    out[r][c] += a[r][k] * b[k][c];
                }
            }
        }
        out
    };
    let r = mul(&rz(t1), &mul(&ry(t2), &rz(t3)));
    let mut rd = [[S::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            rd[i][j] = r[i][j] * lam[j];
        }
    }
    let rt = {
        let mut t = [[S::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = r[j][i];
            }
        }
        t
    };
    let mut a = mul(&rd, &rt);
    // symmetrize rounding
    for i in 0..3 {
        for j in i + 1..3 {
            let v = (a[i][j] + a[j][i]) / S::of(2.0);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_point() -> ParabolicSymbolPoint<f64> {
        let params = CompactSetParams::default();
        let a = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        ParabolicSymbolPoint::new(1.0, a, 1.0, 0.0, [0.0, 0.0], &params).unwrap()
    }

    #[test]
    fn identity_point_eigenvalues_are_unit() {
        // a0 = a33 = 1, a = I, zeta~ = (1, 0, 0): mu^2 = 1
        let r = symmetrizer(&identity_point(), &default_delta_grid::<f64>(), 1e-3).unwrap();
        assert!((r.mu_plus - Complex::new(1.0, 0.0)).norm() < 1e-14);
        assert!((r.mu_minus - Complex::new(-1.0, 0.0)).norm() < 1e-14);
        assert!(r.kappa >= 1e-3);
    }

    #[test]
    fn symmetrizer_is_hermitian() {
        let r = symmetrizer(&identity_point(), &default_delta_grid::<f64>(), 1e-3).unwrap();
        let s = r.s;
        assert!((s[0][0].im).abs() < 1e-14);
        assert!((s[1][1].im).abs() < 1e-14);
        assert!((s[0][1] - s[1][0].conj()).norm() < 1e-14);
    }

    #[test]
    fn sampled_family_passes_with_global_delta() {
        let params = CompactSetParams::default();
        let pts = sample_compact_set(&params, 200, 42).unwrap();
        assert_eq!(pts.len(), 200);
        let report = verify_family(&pts, &default_delta_grid::<f64>(), 1e-3).unwrap();
        assert!(report.min_kappa >= 1e-3);
        assert!(report.min_re_gap > 0.0, "no eigenvalue on the imaginary axis");
        assert!(report.global_delta > 0.0);
    }

    #[test]
    fn membership_validation_rejects_bad_points() {
        let params = CompactSetParams::<f64>::default();
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        // off the sphere
        assert!(ParabolicSymbolPoint::new(1.0, id, 0.5, 0.0, [0.0, 0.0], &params).is_err());
        // a0 below m
        assert!(ParabolicSymbolPoint::new(0.1, id, 1.0, 0.0, [0.0, 0.0], &params).is_err());
        // negative gamma~
        assert!(ParabolicSymbolPoint::new(1.0, id, -1.0, 0.0, [0.0, 0.0], &params).is_err());
    }

    #[test]
    fn degenerate_compact_set_reports_search_failure() {
        // c0 = 0 admits a singular a; with gamma~ = tau~ = 0 and xi~ in its
        // null space both eigenvalues sit at the origin
        let params = CompactSetParams {
            m: 0.5,
            big_m: 4.0,
            c0: 0.0,
        };
        let a = [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let p = ParabolicSymbolPoint::new(0.5, a, 0.0, 0.0, [1.0, 0.0], &params).unwrap();
        match symmetrizer(&p, &default_delta_grid::<f64>(), 1e-3) {
            Err(Error::SymmetrizerSearch { .. }) => {}
            other => panic!("expected search failure, got {other:?}"),
        }
    }

    #[test]
    fn eigen_split_matches_quadratic_by_vieta() {
        let params = CompactSetParams::default();
        let pts = sample_compact_set(&params, 25, 7).unwrap();
        for p in &pts {
            let a = p.system_matrix();
            let r = symmetrizer(p, &default_delta_grid::<f64>(), 1e-3).unwrap();
            // tr = mu+ + mu-, det = mu+ mu-
            let tr = a[0][0] + a[1][1];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            assert!(((r.mu_plus + r.mu_minus) - tr).norm() < 1e-12);
            assert!(((r.mu_plus * r.mu_minus) - det).norm() < 1e-12);
        }
    }
}
