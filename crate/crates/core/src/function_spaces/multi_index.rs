//! Multi-indices for the conormal vector fields Z1, Z2, Z3.

/// alpha = (a1, a2, a3) with Z^alpha = Z1^a1 Z2^a2 Z3^a3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConormalMultiIndex {
    pub a: [usize; 3],
}

impl ConormalMultiIndex {
    pub const ZERO: Self = Self { a: [0, 0, 0] };

    pub fn order(&self) -> usize {
        self.a[0] + self.a[1] + self.a[2]
    }

    /// Canonical parent: remove one derivative in the first nonzero slot,
    /// so that Z^alpha = Z_i Z^parent with i the first nonzero slot. Used to
    /// build all Z^alpha f by one application per index.
    pub fn parent(&self) -> Option<(usize, Self)> {
        for i in 0..3 {
            if self.a[i] > 0 {
                let mut p = *self;
                p.a[i] -= 1;
                return Some((i + 1, p));
            }
        }
        None
    }

    /// All multi-indices with |alpha| <= m, sorted by level then lexicographic.
    pub fn up_to(m: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for total in 0..=m {
            for a1 in (0..=total).rev() {
                for a2 in (0..=total - a1).rev() {
                    let a3 = total - a1 - a2;
                    out.push(Self { a: [a1, a2, a3] });
                }
            }
        }
        out
    }
}

impl std::fmt::Display for ConormalMultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.a[0], self.a[1], self.a[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_binomial() {
        // #{|alpha| <= m} = C(m + 3, 3)
        assert_eq!(ConormalMultiIndex::up_to(0).len(), 1);
        assert_eq!(ConormalMultiIndex::up_to(1).len(), 4);
        assert_eq!(ConormalMultiIndex::up_to(4).len(), 35);
        assert_eq!(ConormalMultiIndex::up_to(6).len(), 84);
    }

    #[test]
    fn parent_reconstructs() {
        for idx in ConormalMultiIndex::up_to(3) {
            if let Some((dir, p)) = idx.parent() {
                let mut rebuilt = p;
                rebuilt.a[dir - 1] += 1;
                assert_eq!(rebuilt, idx);
                assert_eq!(p.order() + 1, idx.order());
            } else {
                assert_eq!(idx, ConormalMultiIndex::ZERO);
            }
        }
    }
}
