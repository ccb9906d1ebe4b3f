//! Discrete norms: fractional Sobolev norms of boundary data, conormal
//! derivatives and conormal Sobolev norms on the strip, tangential
//! fractional norms.

use std::collections::HashMap;

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::grid::StripGrid;
use crate::scalar::Real;

use super::multi_index::ConormalMultiIndex;

/// |h|_s = (L * sum_xi (1 + |xi|^2)^s |hhat(xi)|^2)^{1/2}, where the torus
/// measure L makes s = 0 agree with the grid L2 norm.
pub fn boundary_norm<S: Real>(grid: &StripGrid<S>, h: &Array2<S>, s: S) -> S {
    let spec = grid.forward_surface(h);
    boundary_norm_spec(grid, &spec, s)
}

/// Same norm evaluated from already-transformed coefficients.
pub fn boundary_norm_spec<S: Real>(
    grid: &StripGrid<S>,
    h_hat: &ndarray::Array2<num_complex::Complex<S>>,
    s: S,
) -> S {
    let mut acc = S::zero();
    for m1 in 0..grid.n1 {
        for m2 in 0..grid.n2 {
            let w = (S::one() + grid.k_sq(m1, m2)).powf(s);
            acc += w * h_hat[[m1, m2]].norm_sqr();
        }
    }
    (acc * grid.l1 * grid.l2).sqrt()
}

/// Conormal vector fields: Z1, Z2 horizontal spectral derivatives,
/// Z3 = z/(1-z) d_z with the LGL vertical derivative.
pub fn conormal_derivative<S: Real>(
    grid: &StripGrid<S>,
    f: &Array3<S>,
    direction: usize,
) -> Result<Array3<S>> {
    grid.check_shape(f)?;
    match direction {
        1 | 2 => Ok(grid.d_horizontal(f, direction)),
        3 => {
            let mut out = grid.d_vertical(f);
            let (n1, n2, nz) = grid.shape();
            for iz in 0..nz {
                let w = grid.z[iz] / (S::one() - grid.z[iz]);
                for i1 in 0..n1 {
                    for i2 in 0..n2 {
                        out[[i1, i2, iz]] *= w;
                    }
                }
            }
            Ok(out)
        }
        other => Err(Error::InvalidDirection(other)),
    }
}

/// All Z^alpha f for |alpha| <= m, one vertical/horizontal application per
/// index via the canonical factorization Z^alpha = Z_i Z^parent.
pub fn conormal_pack<S: Real>(
    grid: &StripGrid<S>,
    f: &Array3<S>,
    m: usize,
) -> Result<Vec<(ConormalMultiIndex, Array3<S>)>> {
    grid.check_shape(f)?;
    let indices = ConormalMultiIndex::up_to(m);
    let mut fields: Vec<(ConormalMultiIndex, Array3<S>)> = Vec::with_capacity(indices.len());
    let mut position: HashMap<ConormalMultiIndex, usize> = HashMap::new();
    for idx in indices {
        let field = match idx.parent() {
            None => f.clone(),
            Some((dir, parent)) => {
                let at = position[&parent];
                conormal_derivative(grid, &fields[at].1, dir)?
            }
        };
        position.insert(idx, fields.len());
        fields.push((idx, field));
    }
    Ok(fields)
}

/// ||f||_m^2 = sum_{|alpha| <= m} ||Z^alpha f||_{L2(dy dz)}^2.
pub fn conormal_norm<S: Real>(grid: &StripGrid<S>, f: &Array3<S>, m: usize) -> Result<S> {
    let pack = conormal_pack(grid, f, m)?;
    let mut acc = S::zero();
    for (_, g) in &pack {
        let n = grid.l2_norm(g);
        acc += n * n;
    }
    Ok(acc.sqrt())
}

/// ||f||_{m,infty} = sum_{|alpha| <= m} sup |Z^alpha f|.
pub fn conormal_sup_norm<S: Real>(grid: &StripGrid<S>, f: &Array3<S>, m: usize) -> Result<S> {
    let pack = conormal_pack(grid, f, m)?;
    Ok(pack.iter().map(|(_, g)| grid.max_abs(g)).fold(S::zero(), |a, b| a + b))
}

/// Tangential fractional norm ||Lambda^s f||_{L2(strip)}: the boundary
/// Fourier multiplier applied per depth level, then integrated in z.
pub fn tangential_norm<S: Real>(grid: &StripGrid<S>, f: &Array3<S>, s: S) -> S {
    let spec = grid.forward(f);
    let mut acc = S::zero();
    for m1 in 0..grid.n1 {
        for m2 in 0..grid.n2 {
            let w = (S::one() + grid.k_sq(m1, m2)).powf(s);
            for iz in 0..grid.nz {
                acc += w * grid.wz[iz] * spec[[m1, m2, iz]].norm_sqr();
            }
        }
    }
    (acc * grid.l1 * grid.l2).sqrt()
}

/// ||f||_{E^m}^2 = ||f||_m^2 + ||d_z f||_{m-1}^2 for m >= 1.
pub fn em_norm<S: Real>(grid: &StripGrid<S>, f: &Array3<S>, m: usize) -> Result<S> {
    assert!(m >= 1, "E^m norm needs m >= 1");
    let base = conormal_norm(grid, f, m)?;
    let fz = grid.d_vertical(f);
    let dz_part = conormal_norm(grid, &fz, m - 1)?;
    Ok((base * base + dz_part * dz_part).sqrt())
}

/// Named nonnegative norm values with a stable column order; one CSV row
/// per (time, viscosity).
#[derive(Debug, Clone)]
pub struct NormReport<S> {
    entries: Vec<(String, S)>,
}

impl<S: Real> NormReport<S> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn push(&mut self, tag: &str, value: S) -> Result<()> {
        if !value.is_finite() || value < S::zero() {
            return Err(Error::NonFinite {
                context: format!("norm report entry {tag} = {value}"),
                time: f64::NAN,
            });
        }
        self.entries.push((tag.to_string(), value));
        Ok(())
    }

    pub fn get(&self, tag: &str) -> Option<S> {
        self.entries
            .iter()
            .find(|(t, _)| t == tag)
            .map(|(_, v)| *v)
    }

    pub fn csv_header(&self) -> String {
        self.entries
            .iter()
            .map(|(t, _)| t.clone())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn csv_row(&self) -> String {
        self.entries
            .iter()
            .map(|(_, v)| format!("{v:.17e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, S)> {
        self.entries.iter().map(|(t, v)| (t.as_str(), *v))
    }
}

impl<S: Real> Default for NormReport<S> {
    fn default() -> Self {
        Self::new()
    }
}
