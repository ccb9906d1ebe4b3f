//! Binary checkpoint format, byte-exact:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FSLB"
//! 4       4     version (u32 LE) = 1
//! 8       8     n1 (u64 LE)
//! 16      8     n2 (u64 LE)
//! 24      8     nz (u64 LE)
//! 32      8     d  (u64 LE, 1 or 2)
//! 40      8     H  (f64 LE, strip depth)
//! 48      8     L1 (f64 LE)
//! 56      8     L2 (f64 LE)
//! 64      8     eps (f64 LE)
//! 72      8     t  (f64 LE)
//! 80      8     A  (f64 LE)
//! 88      ...   v1, v2, v3 then h, raw f64 LE, row-major
//! ```
//!
//! Field data is row-major with index order (i1, i2, iz), iz fastest. Each
//! velocity component holds n1*n2*nz values, h holds n1*n2. Values are
//! stored as f64 regardless of the in-memory scalar type.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::field::Vec3Field;
use crate::scalar::Real;

use super::state::FlowState;

const MAGIC: &[u8; 4] = b"FSLB";
const VERSION: u32 = 1;

/// Raw decoded checkpoint; the caller re-assembles the frame from h.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub n1: usize,
    pub n2: usize,
    pub nz: usize,
    pub d: usize,
    pub depth: f64,
    pub l1: f64,
    pub l2: f64,
    pub eps: f64,
    pub t: f64,
    pub a: f64,
    pub v: [Vec<f64>; 3],
    pub h: Vec<f64>,
}

pub fn write_checkpoint<S: Real>(path: &Path, state: &FlowState<S>, a: S) -> Result<()> {
    let grid = &state.grid;
    let (n1, n2, nz) = grid.shape();
    let d = if n2 > 1 { 2u64 } else { 1u64 };
    let mut buf: Vec<u8> = Vec::with_capacity(88 + 8 * (3 * n1 * n2 * nz + n1 * n2));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    for dim in [n1 as u64, n2 as u64, nz as u64, d] {
        buf.extend_from_slice(&dim.to_le_bytes());
    }
    let f64s = [
        grid.depth.to_f64().unwrap(),
        grid.l1.to_f64().unwrap(),
        grid.l2.to_f64().unwrap(),
        state.eps.to_f64().unwrap(),
        state.t.to_f64().unwrap(),
        a.to_f64().unwrap(),
    ];
    for x in f64s {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for comp in 0..3 {
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    let x = state.v.c[comp][[i1, i2, iz]].to_f64().unwrap();
                    buf.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
    }
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let x = state.surface.h[[i1, i2]].to_f64().unwrap();
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 88 {
        return Err(Error::Format("checkpoint shorter than its header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic (expected FSLB)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let u = |at: usize| -> u64 { u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) };
    let f = |at: usize| -> f64 { f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) };
    let (n1, n2, nz, d) = (u(8) as usize, u(16) as usize, u(24) as usize, u(32) as usize);
    let expected = 88 + 8 * (3 * n1 * n2 * nz + n1 * n2);
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "payload size {} does not match dims (expected {expected})",
            bytes.len()
        )));
    }
    let mut at = 88;
    let mut read_block = |len: usize| -> Vec<f64> {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(f(at));
            at += 8;
        }
        out
    };
    let v1 = read_block(n1 * n2 * nz);
    let v2 = read_block(n1 * n2 * nz);
    let v3 = read_block(n1 * n2 * nz);
    let h = read_block(n1 * n2);
    Ok(Checkpoint {
        n1,
        n2,
        nz,
        d,
        depth: f(40),
        l1: f(48),
        l2: f(56),
        eps: f(64),
        t: f(72),
        a: f(80),
        v: [v1, v2, v3],
        h,
    })
}

impl Checkpoint {
    /// Field arrays in the in-memory layout.
    pub fn velocity<S: Real>(&self) -> Vec3Field<S> {
        let shape = (self.n1, self.n2, self.nz);
        let mut v = Vec3Field::zeros(shape);
        for comp in 0..3 {
            let mut at = 0;
            for i1 in 0..self.n1 {
                for i2 in 0..self.n2 {
                    for iz in 0..self.nz {
                        v.c[comp][[i1, i2, iz]] = S::of(self.v[comp][at]);
                        at += 1;
                    }
                }
            }
        }
        v
    }

    pub fn elevation<S: Real>(&self) -> Array2<S> {
        let mut h = Array2::zeros((self.n1, self.n2));
        let mut at = 0;
        for i1 in 0..self.n1 {
            for i2 in 0..self.n2 {
                h[[i1, i2]] = S::of(self.h[at]);
                at += 1;
            }
        }
        h
    }

    #[allow(clippy::type_complexity)]
    pub fn fields<S: Real>(&self) -> (Vec3Field<S>, Array2<S>) {
        (self.velocity(), self.elevation())
    }
}

/// Convenience for tests: all-field round-trip distance.
pub fn max_roundtrip_error<S: Real>(state: &FlowState<S>, ck: &Checkpoint) -> f64 {
    let mut worst = 0.0f64;
    let (n1, n2, nz) = state.grid.shape();
    let mut at = 0;
    for comp in 0..3 {
        at = 0;
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for iz in 0..nz {
                    let a = state.v.c[comp][[i1, i2, iz]].to_f64().unwrap();
                    worst = worst.max((a - ck.v[comp][at]).abs());
                    at += 1;
                }
            }
        }
    }
    let _ = at;
    let mut at_h = 0;
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let a = state.surface.h[[i1, i2]].to_f64().unwrap();
            worst = worst.max((a - ck.h[at_h]).abs());
            at_h += 1;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::initial::standing_wave;
    use crate::geometry::CutoffProfile;
    use crate::grid::StripGrid;
    use std::sync::Arc;

    #[test]
    fn roundtrip_is_exact_for_f64() {
        let grid = Arc::new(
            StripGrid::new(8, 1, 6, 2.0 * std::f64::consts::PI, 1.0, 2.0).unwrap(),
        );
        let chi = CutoffProfile::default_profile();
        let (mut state, a) = standing_wave(grid.clone(), &chi, 2, 1e-2, 0.5, 0.5).unwrap();
        state.v.c[0].mapv_inplace(|_| 0.123456789);
        state.t = 0.75;
        let dir = std::env::temp_dir().join("fslab_ck_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.ck");
        write_checkpoint(&path, &state, a).unwrap();
        let ck = read_checkpoint(&path).unwrap();
        assert_eq!(ck.n1, 8);
        assert_eq!(ck.d, 1);
        assert_eq!(ck.t, 0.75);
        assert_eq!(ck.eps, 0.5);
        assert_eq!(max_roundtrip_error(&state, &ck), 0.0);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn rejects_corrupt_files() {
        let dir = std::env::temp_dir().join("fslab_ck_test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.ck");
        std::fs::write(&path, b"not a checkpoint").unwrap();
        assert!(matches!(read_checkpoint(&path), Err(Error::Format(_))));
        std::fs::remove_file(&path).unwrap();
    }
}
