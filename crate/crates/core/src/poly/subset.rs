use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest number of variables a subset bitmask can address.
pub const MAX_VARS: usize = 64;

/// A subset of `[1, n]`, stored as a bitmask (member `i` is bit `i - 1`).
///
/// Ordered canonically by size, then by bitmask (colex within a size).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SubsetIndex(u64);

impl SubsetIndex {
    pub const EMPTY: SubsetIndex = SubsetIndex(0);

    /// From a strictly increasing list of 1-based members.
    pub fn from_members(members: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        let mut prev = 0usize;
        for &m in members {
            if m == 0 || m > MAX_VARS {
                return Err(Error::IndexOutOfRange {
                    index: m,
                    max: MAX_VARS,
                });
            }
            if m <= prev {
                return Err(Error::Parse(format!(
                    "subset members {members:?} not strictly increasing"
                )));
            }
            prev = m;
            mask |= 1 << (m - 1);
        }
        Ok(SubsetIndex(mask))
    }

    #[inline]
    pub fn from_mask(mask: u64) -> Self {
        SubsetIndex(mask)
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        (1..=MAX_VARS).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    /// Members in increasing order, 1-based.
    pub fn members(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(bit + 1)
            }
        })
    }

    /// Largest member, or 0 for the empty set.
    pub fn max_member(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn with(self, i: usize) -> Self {
        SubsetIndex(self.0 | 1 << (i - 1))
    }

    pub fn without(self, i: usize) -> Self {
        SubsetIndex(self.0 & !(1 << (i - 1)))
    }

    #[inline]
    pub fn is_subset_of(self, other: SubsetIndex) -> bool {
        self.0 & !other.0 == 0
    }

    /// Every size-`k` subset of `[1, n]` in increasing bitmask order.
    pub fn of_size(n: usize, k: usize) -> impl Iterator<Item = SubsetIndex> {
        assert!(n <= MAX_VARS, "at most {MAX_VARS} variables");
        let limit: u128 = 1u128 << n;
        let mut next: Option<u128> = if k <= n { Some((1u128 << k) - 1) } else { None };
        std::iter::from_fn(move || {
            let cur = next?;
            // Gosper's hack; the empty set has no successor.
            next = if cur == 0 {
                None
            } else {
                let low = cur & cur.wrapping_neg();
                let ripple = cur + low;
                let succ = (((ripple ^ cur) >> 2) / low) | ripple;
                (succ < limit).then_some(succ)
            };
            Some(SubsetIndex(cur as u64))
        })
    }

    /// Every subset of `[1, n]` with at most `d` members, in canonical order.
    pub fn up_to(n: usize, d: usize) -> impl Iterator<Item = SubsetIndex> {
        (0..=d.min(n)).flat_map(move |k| Self::of_size(n, k))
    }
}

impl Ord for SubsetIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then(self.0.cmp(&other.0))
    }
}

impl PartialOrd for SubsetIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// `C(n, k)` as an exact integer.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_binomially_many() {
        for n in 0..=10 {
            for k in 0..=n + 1 {
                let subsets: Vec<_> = SubsetIndex::of_size(n, k).collect();
                assert_eq!(subsets.len() as u128, binomial(n, k), "n={n} k={k}");
                assert!(subsets.iter().all(|s| s.len() == k && s.max_member() <= n));
                assert!(subsets.windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert_eq!(SubsetIndex::of_size(64, 63).count(), 64);
        assert_eq!(SubsetIndex::of_size(64, 64).count(), 1);
    }

    #[test]
    fn canonical_order_is_size_then_mask() {
        let all: Vec<_> = SubsetIndex::up_to(3, 3).collect();
        let listed: Vec<Vec<usize>> = all.iter().map(|s| s.members()).collect();
        assert_eq!(
            listed,
            vec![
                vec![],
                vec![1],
                vec![2],
                vec![3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3],
                vec![1, 2, 3]
            ]
        );
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
    }

    #[test]
    fn member_validation() {
        assert!(SubsetIndex::from_members(&[2, 1]).is_err());
        assert!(SubsetIndex::from_members(&[1, 1]).is_err());
        assert!(SubsetIndex::from_members(&[0]).is_err());
        assert!(SubsetIndex::from_members(&[65]).is_err());
        let s = SubsetIndex::from_members(&[1, 3, 64]).unwrap();
        assert_eq!(s.members(), vec![1, 3, 64]);
        assert!(s.contains(64) && !s.contains(2));
        assert_eq!(format!("{s:?}"), "{1,3,64}");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(12, 3), 220);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(0, 0), 1);
    }
}
