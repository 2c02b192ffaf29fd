//! Canonical basis of two indistinguishable bosons on `L` sites.
//!
//! The state with one boson on `q` and one on `r` is
//! `a+_q a+_r |vac> / sqrt(1 + delta_qr)`, identical to the one for `(r, q)`.
//! Basis vectors are enumerated row-major over `q <= r`:
//! `(0,0), (0,1), ..., (0,L-1), (1,1), ..., (L-1,L-1)`, giving
//! `D = L(L+1)/2` states. This order is also the on-disk order of density
//! matrix files.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    num_sites: usize,
    pairs: Vec<(usize, usize)>,
}

/// `L(L+1)/2`.
pub fn two_boson_dim(num_sites: usize) -> usize {
    num_sites * (num_sites + 1) / 2
}

impl FockBasis {
    pub fn new(num_sites: usize) -> Self {
        let pairs = (0..num_sites)
            .flat_map(|q| (q..num_sites).map(move |r| (q, r)))
            .collect();
        FockBasis { num_sites, pairs }
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    /// Canonical pairs in index order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Linear index of the unordered pair `{q, r}`.
    pub fn index_of(&self, q: usize, r: usize) -> Result<usize> {
        for s in [q, r] {
            if s >= self.num_sites {
                return Err(Error::SiteOutOfRange {
                    site: s,
                    num_sites: self.num_sites,
                });
            }
        }
        Ok(self.index_of_unchecked(q, r))
    }

    #[inline]
    pub(crate) fn index_of_unchecked(&self, q: usize, r: usize) -> usize {
        let (a, b) = if q <= r { (q, r) } else { (r, q) };
        a * self.num_sites - a * a.saturating_sub(1) / 2 + (b - a)
    }

    pub fn pair_of(&self, index: usize) -> Result<(usize, usize)> {
        self.pairs.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            dim: self.dim(),
        })
    }
}

/// Prefactor `1 / sqrt(1 + delta_qr)` that makes `a+_q a+_r |vac>` a unit vector.
pub fn normalization(q: usize, r: usize) -> f64 {
    if q == r {
        FRAC_1_SQRT_2
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_site_layout() {
        let b = FockBasis::new(4);
        assert_eq!(b.dim(), 10);
        assert_eq!(b.index_of(0, 0).unwrap(), 0);
        assert_eq!(b.index_of(3, 3).unwrap(), 9);
        assert_eq!(b.index_of(2, 1).unwrap(), b.index_of(1, 2).unwrap());
        // Enumerate the ten canonical pairs by hand.
        let expected = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];
        for (i, &(q, r)) in expected.iter().enumerate() {
            assert_eq!(b.index_of(q, r).unwrap(), i);
            assert_eq!(b.pair_of(i).unwrap(), (q, r));
        }
    }

    #[test]
    fn ends_of_the_basis() {
        for l in 1..12 {
            let b = FockBasis::new(l);
            assert_eq!(b.dim(), two_boson_dim(l));
            assert_eq!(b.pair_of(0).unwrap(), (0, 0));
            assert_eq!(b.pair_of(b.dim() - 1).unwrap(), (l - 1, l - 1));
        }
    }

    #[test]
    fn out_of_range() {
        let b = FockBasis::new(4);
        assert_eq!(b.index_of(4, 0).unwrap_err(), Error::SiteOutOfRange { site: 4, num_sites: 4 });
        assert_eq!(b.pair_of(10).unwrap_err(), Error::IndexOutOfRange { index: 10, dim: 10 });
    }

    #[test]
    fn seven_site_round_trip() {
        let b = FockBasis::new(7);
        for i in 0..b.dim() {
            let (q, r) = b.pair_of(i).unwrap();
            assert!(q <= r);
            assert_eq!(b.index_of(q, r).unwrap(), i);
            assert_eq!(b.index_of(r, q).unwrap(), i);
        }
    }

    #[test]
    fn normalization_values() {
        assert_eq!(normalization(0, 1), 1.0);
        assert_eq!(normalization(3, 3), 0.5f64.sqrt());
    }

    proptest! {
        #[test]
        fn index_is_monotone_in_q_then_r(l in 2usize..40, a in any::<[u32; 4]>()) {
            let pick = |x: u32, y: u32| {
                let (x, y) = (x as usize % l, y as usize % l);
                (x.min(y), x.max(y))
            };
            let (p1, p2) = (pick(a[0], a[1]), pick(a[2], a[3]));
            let b = FockBasis::new(l);
            let (i1, i2) = (b.index_of(p1.0, p1.1).unwrap(), b.index_of(p2.0, p2.1).unwrap());
            prop_assert_eq!(i1.cmp(&i2), p1.cmp(&p2));
        }
    }
}
