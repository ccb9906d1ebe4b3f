//! Discretization of the strip {(y, z) : y periodic, z in [-H, 0]}.
//!
//! Horizontal directions are uniform periodic grids handled by FFT, the
//! vertical direction is Legendre-Gauss-Lobatto collocation mapped to
//! [-H, 0]. Node index 0 is the free surface z = 0, index `nz - 1` is the
//! bottom z = -H.
//!
//! With LGL nodes the quadrature rule is exact through degree `2 nz - 3`,
//! which gives the discrete summation-by-parts identity
//! `Wz D + D^T Wz = e_top e_top^T - e_bot e_bot^T` to rounding. The elliptic
//! solver and the pressure projection both lean on this identity.

use ndarray::{Array2, Array3};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{FftPair, Real};

/// Number of horizontal dimensions (1 or 2). `d = 1` stores a trivial
/// second axis of size one so both cases share every code path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorizontalDim {
    One,
    Two,
}

/// Fixed computational grid plus transform plans. Immutable after
/// construction and shared by reference everywhere.
pub struct StripGrid<S: Real> {
    pub n1: usize,
    pub n2: usize,
    pub nz: usize,
    /// Horizontal periods.
    pub l1: S,
    pub l2: S,
    /// Strip depth (z runs over [-H, 0]).
    pub depth: S,
    /// Wavenumbers used for spectral derivatives (Nyquist zeroed).
    pub k1_deriv: Vec<S>,
    pub k2_deriv: Vec<S>,
    /// Signed wavenumbers with the true Nyquist magnitude, for norms and
    /// Fourier multipliers.
    pub k1: Vec<S>,
    pub k2: Vec<S>,
    /// LGL nodes mapped to [-H, 0], descending from z = 0.
    pub z: Vec<S>,
    /// LGL quadrature weights on [-H, 0].
    pub wz: Vec<S>,
    /// Differentiation matrix d/dz on the mapped nodes.
    pub dz: Array2<S>,
    fft1: FftPair<S>,
    fft2: Option<FftPair<S>>,
}

impl<S: Real> std::fmt::Debug for StripGrid<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StripGrid")
            .field("n1", &self.n1)
            .field("n2", &self.n2)
            .field("nz", &self.nz)
            .field("l1", &self.l1)
            .field("l2", &self.l2)
            .field("depth", &self.depth)
            .finish()
    }
}

fn is_pow2(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre<S: Real>(n: usize, x: S) -> (S, S) {
    if n == 0 {
        return (S::one(), S::zero());
    }
    let mut p_prev = S::one();
    let mut p = x;
    for k in 1..n {
        let kf = S::of_usize(k);
        let next = ((S::of(2.0) * kf + S::one()) * x * p - kf * p_prev) / (kf + S::one());
        p_prev = p;
        p = next;
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let nf = S::of_usize(n);
    let denom = S::one() - x * x;
    let dp = if denom.abs() > S::epsilon() {
        nf * (p_prev - x * p) / denom
    } else {
        // endpoint value: P_n'(+-1) = (+-1)^{n-1} n (n+1) / 2
        let sign = if x > S::zero() || n % 2 == 1 {
            S::one()
        } else {
            -S::one()
        };
        sign * nf * (nf + S::one()) / S::of(2.0)
    };
    (p, dp)
}

/// LGL nodes on [-1, 1], ascending. Interior nodes are the roots of P_{n-1}'.
fn lgl_nodes<S: Real>(n: usize) -> Vec<S> {
    assert!(n >= 2);
    let deg = n - 1;
    let mut nodes = vec![S::zero(); n];
    nodes[0] = -S::one();
    nodes[n - 1] = S::one();
    let pi = S::PI();
    for j in 1..n - 1 {
        // Chebyshev-Gauss-Lobatto initial guess, then Newton on P_{deg}'.
        let mut x = -(pi * S::of_usize(j) / S::of_usize(deg)).cos();
        for _ in 0..50 {
            let (p, dp) = legendre(deg, x);
            let degf = S::of_usize(deg);
            // P'' from the Legendre ODE.
            let ddp = (S::of(2.0) * x * dp - degf * (degf + S::one()) * p) / (S::one() - x * x);
            let step = dp / ddp;
            x = x - step;
            if step.abs() < S::epsilon() * S::of(8.0) {
                break;
            }
        }
        nodes[j] = x;
    }
    nodes
}

/// Barycentric differentiation matrix with the negative-sum diagonal.
fn diff_matrix<S: Real>(nodes: &[S]) -> Array2<S> {
    let n = nodes.len();
    let mut bary = vec![S::one(); n];
    for j in 0..n {
        let mut prod = S::one();
        for k in 0..n {
            if k != j {
                prod *= nodes[j] - nodes[k];
            }
        }
        bary[j] = S::one() / prod;
    }
    let scale = bary.iter().fold(S::zero(), |m, b| m.max(b.abs()));
    for b in bary.iter_mut() {
        *b /= scale;
    }
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        let mut diag = S::zero();
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[[i, j]] = v;
                diag -= v;
            }
        }
        d[[i, i]] = diag;
    }
    d
}

impl<S: Real> StripGrid<S> {
    pub fn new(n1: usize, n2: usize, nz: usize, l1: S, l2: S, depth: S) -> Result<Self> {
        if !is_pow2(n1) || !is_pow2(n2) {
            return Err(Error::Domain(format!(
                "horizontal grid sizes must be powers of two, got {n1} x {n2}"
            )));
        }
        if nz < 4 {
            return Err(Error::Domain(format!("nz = {nz} too small (need >= 4)")));
        }
        if l1 <= S::zero() || l2 <= S::zero() || depth <= S::zero() {
            return Err(Error::Domain("grid extents must be positive".into()));
        }

        let wave = |n: usize, l: S, zero_nyquist: bool| -> Vec<S> {
            let two_pi = S::of(2.0) * S::PI();
            (0..n)
                .map(|m| {
                    let m_signed = if m <= n / 2 { m as isize } else { m as isize - n as isize };
                    if zero_nyquist && n > 1 && m == n / 2 {
                        S::zero()
                    } else {
                        two_pi * S::of(m_signed as f64) / l
                    }
                })
                .collect()
        };

        // Nodes ascending in x then mapped so index 0 is z = 0.
        let x = lgl_nodes::<S>(nz);
        let half = depth / S::of(2.0);
        let mut z: Vec<S> = x.iter().map(|&xi| (xi - S::one()) * half).collect();
        z.reverse();

        let deg = nz - 1;
        let degf = S::of_usize(deg);
        let mut wz: Vec<S> = x
            .iter()
            .map(|&xi| {
                let (p, _) = legendre(deg, xi);
                S::of(2.0) / (degf * (degf + S::one()) * p * p) * half
            })
            .collect();
        wz.reverse();

        let z_nodes = z.clone();
        let dz = diff_matrix(&z_nodes);

        Ok(Self {
            n1,
            n2,
            nz,
            l1,
            l2,
            depth,
            k1_deriv: wave(n1, l1, true),
            k2_deriv: wave(n2, l2, true),
            k1: wave(n1, l1, false),
            k2: wave(n2, l2, false),
            z,
            wz,
            dz,
            fft1: S::plan_fft(n1),
            fft2: if n2 == n1 { None } else { Some(S::plan_fft(n2)) },
        })
    }

    /// Convenience square-torus constructor used by the CLI (`l2 = l1`).
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.nz)
    }

    pub fn check_shape(&self, f: &Array3<S>) -> Result<()> {
        let got = f.dim();
        if got != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                got,
            });
        }
        Ok(())
    }

    /// Uniform horizontal cell sizes.
    pub fn dy1(&self) -> S {
        self.l1 / S::of_usize(self.n1)
    }

    pub fn dy2(&self) -> S {
        self.l2 / S::of_usize(self.n2)
    }

    /// Horizontal measure of one grid column (dy1 * dy2).
    pub fn horizontal_weight(&self) -> S {
        self.dy1() * self.dy2()
    }

    pub fn horizontal_coord1(&self, i1: usize) -> S {
        self.l1 * S::of_usize(i1) / S::of_usize(self.n1)
    }

    pub fn horizontal_coord2(&self, i2: usize) -> S {
        self.l2 * S::of_usize(i2) / S::of_usize(self.n2)
    }

    /// |xi|^2 for the horizontal mode (m1, m2).
    pub fn k_sq(&self, m1: usize, m2: usize) -> S {
        self.k1[m1] * self.k1[m1] + self.k2[m2] * self.k2[m2]
    }

    fn fft2_plan(&self) -> &FftPair<S> {
        self.fft2.as_ref().unwrap_or(&self.fft1)
    }

    /// Forward horizontal transform: coefficients normalized so that
    /// f(y) = sum_k fhat(k) exp(i k . y).
    pub fn forward(&self, f: &Array3<S>) -> Array3<Complex<S>> {
        let (n1, n2, nz) = self.shape();
        let mut spec = Array3::zeros((n1, n2, nz));
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    spec[[i1, i2, iz]] = Complex::new(f[[i1, i2, iz]], S::zero());
                }
            }
        }
        self.forward_inplace(&mut spec);
        spec
    }

    /// Forward transform of an already-complex field (in place).
    pub fn forward_inplace(&self, spec: &mut Array3<Complex<S>>) {
        let (n1, n2, nz) = self.shape();
        let mut buf = vec![Complex::new(S::zero(), S::zero()); n1.max(n2)];
        if n1 > 1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    for i1 in 0..n1 {
                        buf[i1] = spec[[i1, i2, iz]];
                    }
                    self.fft1.forward.process(&mut buf[..n1]);
                    for i1 in 0..n1 {
                        spec[[i1, i2, iz]] = buf[i1];
                    }
                }
            }
        }
        if n2 > 1 {
            let plan = self.fft2_plan();
            for i1 in 0..n1 {
                for iz in 0..nz {
                    for i2 in 0..n2 {
                        buf[i2] = spec[[i1, i2, iz]];
                    }
                    plan.forward.process(&mut buf[..n2]);
                    for i2 in 0..n2 {
                        spec[[i1, i2, iz]] = buf[i2];
                    }
                }
            }
        }
        let scale = S::one() / S::of_usize(n1 * n2);
        spec.mapv_inplace(|c| c * scale);
    }

    /// Inverse horizontal transform, discarding the imaginary part.
    pub fn backward(&self, spec: &Array3<Complex<S>>) -> Array3<S> {
        let mut work = spec.clone();
        self.backward_inplace(&mut work);
        work.mapv(|c| c.re)
    }

    /// Inverse transform keeping the complex values.
    pub fn backward_inplace(&self, spec: &mut Array3<Complex<S>>) {
        let (n1, n2, nz) = self.shape();
        let mut buf = vec![Complex::new(S::zero(), S::zero()); n1.max(n2)];
        if n2 > 1 {
            let plan = self.fft2_plan();
            for i1 in 0..n1 {
                for iz in 0..nz {
                    for i2 in 0..n2 {
                        buf[i2] = spec[[i1, i2, iz]];
                    }
                    plan.inverse.process(&mut buf[..n2]);
                    for i2 in 0..n2 {
                        spec[[i1, i2, iz]] = buf[i2];
                    }
                }
            }
        }
        if n1 > 1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    for i1 in 0..n1 {
                        buf[i1] = spec[[i1, i2, iz]];
                    }
                    self.fft1.inverse.process(&mut buf[..n1]);
                    for i1 in 0..n1 {
                        spec[[i1, i2, iz]] = buf[i1];
                    }
                }
            }
        }
    }

    /// Spectral horizontal derivative along axis 1 or 2.
    pub fn d_horizontal(&self, f: &Array3<S>, axis: usize) -> Array3<S> {
        let mut spec = self.forward(f);
        self.d_horizontal_spec(&mut spec, axis);
        self.backward(&spec)
    }

    /// Multiply a spectrum by i*k along the given horizontal axis.
    pub fn d_horizontal_spec(&self, spec: &mut Array3<Complex<S>>, axis: usize) {
        let (n1, n2, nz) = self.shape();
        let i_unit = Complex::new(S::zero(), S::one());
        match axis {
            1 => {
                for m1 in 0..n1 {
                    let ik = i_unit * self.k1_deriv[m1];
                    for m2 in 0..n2 {
                        for iz in 0..nz {
                            spec[[m1, m2, iz]] = spec[[m1, m2, iz]] * ik;
                        }
                    }
                }
            }
            2 => {
                for m2 in 0..n2 {
                    let ik = i_unit * self.k2_deriv[m2];
                    for m1 in 0..n1 {
                        for iz in 0..nz {
                            spec[[m1, m2, iz]] = spec[[m1, m2, iz]] * ik;
                        }
                    }
                }
            }
            _ => panic!("horizontal axis must be 1 or 2"),
        }
    }

    /// Vertical derivative: apply the LGL differentiation matrix along z.
    pub fn d_vertical(&self, f: &Array3<S>) -> Array3<S> {
        let (n1, n2, nz) = self.shape();
        let mut out = Array3::zeros((n1, n2, nz));
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for i in 0..nz {
                    let mut acc = S::zero();
                    for j in 0..nz {
                        acc += self.dz[[i, j]] * f[[i1, i2, j]];
                    }
                    out[[i1, i2, i]] = acc;
                }
            }
        }
        out
    }

    /// Transpose-of-D applied along z (adjoint building block).
    pub fn d_vertical_transpose(&self, f: &Array3<S>) -> Array3<S> {
        let (n1, n2, nz) = self.shape();
        let mut out = Array3::zeros((n1, n2, nz));
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for i in 0..nz {
                    let mut acc = S::zero();
                    for j in 0..nz {
                        acc += self.dz[[j, i]] * f[[i1, i2, j]];
                    }
                    out[[i1, i2, i]] = acc;
                }
            }
        }
        out
    }

    /// Vertical derivative of a single column (values ordered like `z`).
    pub fn d_vertical_column(&self, col: &[S]) -> Vec<S> {
        let nz = self.nz;
        let mut out = vec![S::zero(); nz];
        for i in 0..nz {
            let mut acc = S::zero();
            for j in 0..nz {
                acc += self.dz[[i, j]] * col[j];
            }
            out[i] = acc;
        }
        out
    }

    /// L2(strip) inner product with the flat measure dy dz.
    pub fn inner(&self, f: &Array3<S>, g: &Array3<S>) -> S {
        let (n1, n2, nz) = self.shape();
        let wy = self.horizontal_weight();
        let mut acc = S::zero();
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    acc += self.wz[iz] * f[[i1, i2, iz]] * g[[i1, i2, iz]];
                }
            }
        }
        acc * wy
    }

    /// L2(strip) norm with the flat measure.
    pub fn l2_norm(&self, f: &Array3<S>) -> S {
        self.inner(f, f).sqrt()
    }

    /// L2 norm weighted pointwise by `w` (e.g. the volume element dV).
    pub fn l2_norm_weighted(&self, f: &Array3<S>, w: &Array3<S>) -> S {
        let (n1, n2, nz) = self.shape();
        let wy = self.horizontal_weight();
        let mut acc = S::zero();
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    let v = f[[i1, i2, iz]];
                    acc += self.wz[iz] * w[[i1, i2, iz]] * v * v;
                }
            }
        }
        (acc * wy).sqrt()
    }

    /// Integral over the strip with the flat measure.
    pub fn integral(&self, f: &Array3<S>) -> S {
        let (n1, n2, nz) = self.shape();
        let wy = self.horizontal_weight();
        let mut acc = S::zero();
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    acc += self.wz[iz] * f[[i1, i2, iz]];
                }
            }
        }
        acc * wy
    }

    /// Integral over the boundary z = 0 (dy measure).
    pub fn boundary_integral(&self, f: &Array2<S>) -> S {
        let wy = self.horizontal_weight();
        f.iter().fold(S::zero(), |acc, &v| acc + v) * wy
    }

    /// Max |f| over the grid.
    pub fn max_abs(&self, f: &Array3<S>) -> S {
        f.iter().fold(S::zero(), |m, &v| m.max(v.abs()))
    }

    /// Trace of a field on z = 0.
    pub fn surface_trace(&self, f: &Array3<S>) -> Array2<S> {
        let (n1, n2, _) = self.shape();
        let mut out = Array2::zeros((n1, n2));
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                out[[i1, i2]] = f[[i1, i2, 0]];
            }
        }
        out
    }

    /// Uniform horizontal field from surface data, i.e. g(y) replicated in z.
    pub fn replicate_surface(&self, g: &Array2<S>) -> Array3<S> {
        let (n1, n2, nz) = self.shape();
        let mut out = Array3::zeros((n1, n2, nz));
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    out[[i1, i2, iz]] = g[[i1, i2]];
                }
            }
        }
        out
    }

    /// 2-D forward transform of boundary data.
    pub fn forward_surface(&self, g: &Array2<S>) -> Array2<Complex<S>> {
        let (n1, n2) = (self.n1, self.n2);
        let mut spec = Array2::zeros((n1, n2));
        let mut buf = vec![Complex::new(S::zero(), S::zero()); n1.max(n2)];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                spec[[i1, i2]] = Complex::new(g[[i1, i2]], S::zero());
            }
        }
        if n1 > 1 {
            for i2 in 0..n2 {
                for i1 in 0..n1 {
                    buf[i1] = spec[[i1, i2]];
                }
                self.fft1.forward.process(&mut buf[..n1]);
                for i1 in 0..n1 {
                    spec[[i1, i2]] = buf[i1];
                }
            }
        }
        if n2 > 1 {
            let plan = self.fft2_plan();
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    buf[i2] = spec[[i1, i2]];
                }
                plan.forward.process(&mut buf[..n2]);
                for i2 in 0..n2 {
                    spec[[i1, i2]] = buf[i2];
                }
            }
        }
        let scale = S::one() / S::of_usize(n1 * n2);
        spec.mapv_inplace(|c| c * scale);
        spec
    }

    /// 2-D inverse transform of boundary data, discarding imaginary parts.
    pub fn backward_surface(&self, spec: &Array2<Complex<S>>) -> Array2<S> {
        let (n1, n2) = (self.n1, self.n2);
        let mut work = spec.clone();
        let mut buf = vec![Complex::new(S::zero(), S::zero()); n1.max(n2)];
        if n2 > 1 {
            let plan = self.fft2_plan();
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    buf[i2] = work[[i1, i2]];
                }
                plan.inverse.process(&mut buf[..n2]);
                for i2 in 0..n2 {
                    work[[i1, i2]] = buf[i2];
                }
            }
        }
        if n1 > 1 {
            for i2 in 0..n2 {
                for i1 in 0..n1 {
                    buf[i1] = work[[i1, i2]];
                }
                self.fft1.inverse.process(&mut buf[..n1]);
                for i1 in 0..n1 {
                    work[[i1, i2]] = buf[i1];
                }
            }
        }
        work.mapv(|c| c.re)
    }
}
