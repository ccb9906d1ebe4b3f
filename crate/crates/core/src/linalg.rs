//! Small dense linear algebra: LU solves for the per-mode vertical systems
//! and closed-form / Jacobi eigen computations for the pointwise matrices.

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// LU factorization with partial pivoting of a dense square matrix.
/// Factored once per mode at setup, applied many times.
#[derive(Debug, Clone)]
pub struct LuFactor<S> {
    n: usize,
    lu: Vec<S>,
    pivots: Vec<usize>,
}

impl<S: Real> LuFactor<S> {
    pub fn new(a: &Array2<S>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let mut lu: Vec<S> = a.iter().cloned().collect();
        let mut pivots = vec![0usize; n];
        for col in 0..n {
            let mut p = col;
            let mut max = lu[col * n + col].abs();
            for r in col + 1..n {
                let v = lu[r * n + col].abs();
                if v > max {
                    max = v;
                    p = r;
                }
            }
            if max == S::zero() || !max.is_finite() {
                return Err(Error::Domain(format!(
                    "singular matrix in LU factorization at column {col}"
                )));
            }
            pivots[col] = p;
            if p != col {
                for c in 0..n {
                    lu.swap(col * n + c, p * n + c);
                }
            }
            let diag = lu[col * n + col];
            for r in col + 1..n {
                let factor = lu[r * n + col] / diag;
                lu[r * n + col] = factor;
                for c in col + 1..n {
                    let sub = factor * lu[col * n + c];
                    lu[r * n + c] -= sub;
                }
            }
        }
        Ok(Self { n, lu, pivots })
    }

    /// Solve in place.
    pub fn solve(&self, b: &mut [S]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for col in 0..n {
            let p = self.pivots[col];
            if p != col {
                b.swap(col, p);
            }
        }
        for r in 1..n {
            let mut acc = b[r];
            for c in 0..r {
                acc = acc - self.lu[r * n + c] * b[c];
            }
            b[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = b[r];
            for c in r + 1..n {
                acc = acc - self.lu[r * n + c] * b[c];
            }
            b[r] = acc / self.lu[r * n + r];
        }
    }
}

/// Eigenvalues of a real symmetric 3x3 matrix by cyclic Jacobi rotations.
/// Returns the eigenvalues sorted ascending.
pub fn sym3_eigenvalues<S: Real>(m: &[[S; 3]; 3]) -> [S; 3] {
    let mut a = *m;
    for _sweep in 0..30 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        let scale = a[0][0].abs() + a[1][1].abs() + a[2][2].abs() + off;
        if off <= scale * S::epsilon() * S::of(4.0) || scale == S::zero() {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() <= scale * S::epsilon() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (S::of(2.0) * a[p][q]);
            let t = {
                let sign = if theta >= S::zero() { S::one() } else { -S::one() };
                sign / (theta.abs() + (theta * theta + S::one()).sqrt())
            };
            let c = S::one() / (t * t + S::one()).sqrt();
            let s = t * c;
            let app = a[p][p];
            let aqq = a[q][q];
            let apq = a[p][q];
            a[p][p] = c * c * app - S::of(2.0) * s * c * apq + s * s * aqq;
            a[q][q] = s * s * app + S::of(2.0) * s * c * apq + c * c * aqq;
            a[p][q] = S::zero();
            a[q][p] = S::zero();
            let r = 3 - p - q;
            let arp = a[r][p];
            let arq = a[r][q];
            a[r][p] = c * arp - s * arq;
            a[p][r] = a[r][p];
            a[r][q] = s * arp + c * arq;
            a[q][r] = a[r][q];
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2]];
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Smallest eigenvalue of a 2x2 Hermitian matrix [[a, b], [conj(b), c]]
/// with real diagonal.
pub fn herm2_min_eigenvalue<S: Real>(a: S, b: Complex<S>, c: S) -> S {
    let mean = (a + c) / S::of(2.0);
    let half_gap = (a - c) / S::of(2.0);
    mean - (half_gap * half_gap + b.norm_sqr()).sqrt()
}

/// Roots of the complex quadratic z^2 + p z + q = 0.
pub fn complex_quadratic_roots<S: Real>(p: Complex<S>, q: Complex<S>) -> (Complex<S>, Complex<S>) {
    let two = S::of(2.0);
    let half_p = p / two;
    let disc = (half_p * half_p - q).sqrt();
    // Pick the numerically stable branch first, recover the other by Vieta.
    let r1 = if (-half_p + disc).norm() >= (-half_p - disc).norm() {
        -half_p + disc
    } else {
        -half_p - disc
    };
    let r2 = if r1.norm() > S::zero() { q / r1 } else { -p - r1 };
    (r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn lu_solves_small_system() {
        let a = array![[4.0, 1.0, 0.0], [1.0, 3.0, -1.0], [0.0, -1.0, 2.0]];
        let lu = LuFactor::new(&a).unwrap();
        let x_true: [f64; 3] = [1.0, -2.0, 0.5];
        let mut b = [4.0 * 1.0 + 1.0 * -2.0, 1.0 - 6.0 - 0.5, 2.0 + 1.0];
        lu.solve(&mut b);
        for (got, want) in b.iter().zip(x_true.iter()) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        assert!(LuFactor::<f64>::new(&a).is_err());
    }

    #[test]
    fn sym3_eigen_known_matrix() {
        // diag(1, 2, 3) rotated is still {1, 2, 3}; start with a plain case
        let m: [[f64; 3]; 3] = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        let ev = sym3_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!((ev[1] - 3.0).abs() < 1e-12);
        assert!((ev[2] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn sym3_eigen_satisfies_characteristic_polynomial() {
        let m: [[f64; 3]; 3] = [[1.3, -0.2, 0.4], [-0.2, 2.1, 0.7], [0.4, 0.7, 0.9]];
        let ev = sym3_eigenvalues(&m);
        for &l in &ev {
            let a = [
                [m[0][0] - l, m[0][1], m[0][2]],
                [m[1][0], m[1][1] - l, m[1][2]],
                [m[2][0], m[2][1], m[2][2] - l],
            ];
            let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
            assert!(det.abs() < 1e-10);
        }
    }

    #[test]
    fn herm2_min_eig() {
        let l: f64 = herm2_min_eigenvalue(2.0, Complex::new(0.0, 1.0), 2.0);
        assert!((l - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadratic_roots() {
        // z^2 - (3+i) z + (2 + 2i) has roots ... check by Vieta instead.
        let p = Complex::new(-3.0, -1.0);
        let q = Complex::new(2.0, 2.0);
        let (r1, r2) = complex_quadratic_roots(p, q);
        assert!(((r1 + r2) + p).norm() < 1e-12);
        assert!(((r1 * r2) - q).norm() < 1e-12);
    }
}
