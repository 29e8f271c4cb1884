//! Coalitions as bitmasks and deterministic subset enumeration.
//!
//! A coalition over `n` players is stored as a `u64` where bit `i - 1`
//! encodes membership of player `i` (players are 1-based everywhere a human
//! sees them; bit positions are 0-based internally). This caps the player
//! universe at 64, far beyond what exhaustive game evaluation can reach.

use crate::error::{Error, Result};

/// Hard cap on the player universe imposed by the `u64` mask representation.
pub const MAX_PLAYERS: usize = 64;

/// Largest `n` for which exhaustive power-set enumeration is allowed without
/// an explicit override (2^30 subsets is already ~10^9 items).
pub const ENUMERATION_GUARD_N: usize = 30;

/// A subset of the player universe `{1, ..., n}` encoded as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    mask: u64,
    n: u8,
}

impl Coalition {
    /// Wraps a raw bitmask over an `n`-player universe.
    ///
    /// # Errors
    ///
    /// Returns an error if `n > 64` or if `mask` has bits at positions
    /// `>= n`.
    pub fn new(mask: u64, n: usize) -> Result<Self> {
        if n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
        }
        if mask & !universe_mask(n) != 0 {
            return Err(Error::MaskOutOfRange { mask, n });
        }
        Ok(Self { mask, n: n as u8 })
    }

    /// The empty coalition over `n` players.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(0, n)
    }

    /// The grand coalition `{1, ..., n}`.
    pub fn grand(n: usize) -> Result<Self> {
        if n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
        }
        Ok(Self { mask: universe_mask(n), n: n as u8 })
    }

    /// Builds a coalition from 1-based player identifiers.
    ///
    /// Duplicates are tolerated (a set is a set).
    ///
    /// # Errors
    ///
    /// Returns an error if `n > 64` or any player is outside `1..=n`.
    pub fn from_players(players: &[usize], n: usize) -> Result<Self> {
        if n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
        }
        let mut mask = 0u64;
        for &p in players {
            if p == 0 || p > n {
                return Err(Error::PlayerOutOfRange { player: p, n });
            }
            mask |= 1 << (p - 1);
        }
        Ok(Self { mask, n: n as u8 })
    }

    /// The raw bitmask.
    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Size of the player universe this coalition lives in.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Number of members.
    pub fn size(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// Membership test for a 1-based player identifier.
    pub fn contains(&self, player: usize) -> bool {
        player >= 1 && player <= self.n() && self.mask >> (player - 1) & 1 == 1
    }

    /// Members as ascending 1-based player identifiers.
    pub fn players(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size());
        let mut m = self.mask;
        while m != 0 {
            out.push(m.trailing_zeros() as usize + 1);
            m &= m - 1;
        }
        out
    }

    /// Set union (same universe assumed).
    pub fn union(&self, other: &Coalition) -> Coalition {
        Coalition { mask: self.mask | other.mask, n: self.n }
    }

    /// Set intersection (same universe assumed).
    pub fn intersection(&self, other: &Coalition) -> Coalition {
        Coalition { mask: self.mask & other.mask, n: self.n }
    }

    /// Set difference `self \ other` (same universe assumed).
    pub fn difference(&self, other: &Coalition) -> Coalition {
        Coalition { mask: self.mask & !other.mask, n: self.n }
    }

    /// Complement within the `n`-player universe.
    pub fn complement(&self) -> Coalition {
        Coalition { mask: !self.mask & universe_mask(self.n()), n: self.n }
    }

    /// Whether `self` is a (not necessarily proper) subset of `other`.
    pub fn is_subset_of(&self, other: &Coalition) -> bool {
        self.mask & !other.mask == 0
    }
}

impl std::fmt::Display for Coalition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.players().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Bitmask with the low `n` bits set (the grand coalition / universe mask).
pub fn universe_mask(n: usize) -> u64 {
    debug_assert!(n <= MAX_PLAYERS);
    if n == MAX_PLAYERS {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Binomial coefficient `C(n, k)` as an exact `u64`.
///
/// Returns 0 when `k > n`. Uses 128-bit intermediates with stepwise exact
/// division, so every value that fits in `u64` (all of `C(64, k)`) is exact.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Multiply before dividing; the running product of i+1 consecutive
        // ratios is itself a binomial coefficient, so the division is exact.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("C(n, k) with n <= 64 fits in u64")
}

/// Number of subsets of an `n`-set with sizes in `min..=max`.
fn subset_count(n: usize, min: usize, max: usize) -> u128 {
    (min..=max.min(n)).map(|s| binomial(n, s) as u128).sum()
}

/// Deterministic subset enumeration over the `n`-player universe.
///
/// Without a size filter, all `2^n` masks are yielded in ascending numeric
/// order. With `sizes = Some((min, max))`, subsets are yielded grouped by
/// size (ascending) and in ascending mask order within each size.
///
/// # Errors
///
/// Returns an error when the filter is inconsistent, or when the enumeration
/// would exceed `2^30` subsets (use [`enumerate_subsets_forced`] to override).
pub fn enumerate_subsets(n: usize, sizes: Option<(usize, usize)>) -> Result<SubsetIter> {
    let count = match sizes {
        None => {
            if n > MAX_PLAYERS {
                return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
            }
            1u128 << n
        }
        Some((min, max)) => {
            if n > MAX_PLAYERS {
                return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
            }
            if min > max || max > n {
                return Err(Error::InvalidSizeRange { min, max, n });
            }
            subset_count(n, min, max)
        }
    };
    if count > 1u128 << ENUMERATION_GUARD_N {
        return Err(Error::EnumerationGuard { n, count });
    }
    Ok(SubsetIter::new(n, sizes))
}

/// [`enumerate_subsets`] without the `2^30` volume guard.
///
/// # Errors
///
/// Still rejects `n > 64` and inconsistent size filters.
pub fn enumerate_subsets_forced(n: usize, sizes: Option<(usize, usize)>) -> Result<SubsetIter> {
    if n > MAX_PLAYERS {
        return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
    }
    if let Some((min, max)) = sizes {
        if min > max || max > n {
            return Err(Error::InvalidSizeRange { min, max, n });
        }
    }
    Ok(SubsetIter::new(n, sizes))
}

/// Iterator over subset bitmasks; see [`enumerate_subsets`] for the order.
pub struct SubsetIter {
    n: usize,
    max_size: usize,
    /// Size class currently being enumerated (unused in numeric mode).
    size: usize,
    /// Next mask to yield, or `None` when exhausted.
    next: Option<u64>,
    /// Numeric order (no filter) vs. size-grouped Gosper order.
    numeric: bool,
}

impl SubsetIter {
    fn new(n: usize, sizes: Option<(usize, usize)>) -> Self {
        match sizes {
            None => Self { n, max_size: n, size: 0, next: Some(0), numeric: true },
            Some((min, max)) => {
                let max = max.min(n);
                Self { n, max_size: max, size: min, next: Some(first_of_size(min)), numeric: false }
            }
        }
    }
}

/// Smallest mask with exactly `size` bits set.
fn first_of_size(size: usize) -> u64 {
    if size == 0 {
        0
    } else {
        universe_mask(size)
    }
}

/// Next-larger mask with the same popcount (Gosper's hack), if any fits in
/// the `n`-bit universe.
fn gosper_next(mask: u64, n: usize) -> Option<u64> {
    if mask == 0 {
        return None; // the empty set is the only size-0 subset
    }
    let u = mask & mask.wrapping_neg();
    let v = mask.wrapping_add(u);
    if v == 0 {
        return None;
    }
    let next = v | (((v ^ mask) / u) >> 2);
    if next & !universe_mask(n) != 0 {
        None
    } else {
        Some(next)
    }
}

impl Iterator for SubsetIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let current = self.next?;
        if self.numeric {
            self.next = if current == universe_mask(self.n) {
                None
            } else {
                Some(current + 1)
            };
        } else {
            self.next = match gosper_next(current, self.n) {
                Some(m) => Some(m),
                None => {
                    // Advance to the next size class that fits in the universe.
                    self.size += 1;
                    if self.size > self.max_size || self.size > self.n {
                        None
                    } else {
                        Some(first_of_size(self.size))
                    }
                }
            };
        }
        Some(current)
    }
}

/// Iterator over all submasks of `mask` (including `mask` itself and 0),
/// in descending numeric order. There are `2^popcount(mask)` of them.
pub fn submasks(mask: u64) -> SubmaskIter {
    SubmaskIter { mask, next: Some(mask) }
}

/// See [`submasks`].
pub struct SubmaskIter {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for SubmaskIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let current = self.next?;
        self.next = if current == 0 {
            None
        } else {
            Some((current - 1) & self.mask)
        };
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coalition_roundtrip_players_and_mask() {
        let c = Coalition::from_players(&[1, 3, 4], 5).unwrap();
        assert_eq!(c.mask(), 0b01101);
        assert_eq!(c.size(), 3);
        assert_eq!(c.players(), vec![1, 3, 4]);
        assert!(c.contains(3));
        assert!(!c.contains(2));
        assert_eq!(c.to_string(), "{1,3,4}");
    }

    #[test]
    fn coalition_set_operations() {
        let a = Coalition::from_players(&[1, 2], 4).unwrap();
        let b = Coalition::from_players(&[2, 3], 4).unwrap();
        assert_eq!(a.union(&b).players(), vec![1, 2, 3]);
        assert_eq!(a.intersection(&b).players(), vec![2]);
        assert_eq!(a.difference(&b).players(), vec![1]);
        assert_eq!(a.complement().players(), vec![3, 4]);
        assert!(a.intersection(&b).is_subset_of(&a));
    }

    #[test]
    fn coalition_rejects_bad_inputs() {
        assert!(Coalition::new(0b100, 2).is_err());
        assert!(Coalition::from_players(&[0], 3).is_err());
        assert!(Coalition::from_players(&[4], 3).is_err());
        assert!(Coalition::empty(65).is_err());
    }

    #[test]
    fn universe_mask_edges() {
        assert_eq!(universe_mask(0), 0);
        assert_eq!(universe_mask(3), 0b111);
        assert_eq!(universe_mask(64), u64::MAX);
    }

    #[test]
    fn binomial_exact_values() {
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(5, 7), 0);
        assert_eq!(binomial(10, 5), 252);
        assert_eq!(binomial(52, 5), 2_598_960);
        // Largest central case representable for a 64-player universe.
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
    }

    #[test]
    fn enumerate_all_subsets_numeric_order() {
        let all: Vec<u64> = enumerate_subsets(3, None).unwrap().collect();
        assert_eq!(all, (0..8).collect::<Vec<u64>>());
    }

    #[test]
    fn enumerate_with_size_filter() {
        // n = 3, sizes 1..=2: the 6 proper nonempty subsets.
        let filtered: Vec<u64> = enumerate_subsets(3, Some((1, 2))).unwrap().collect();
        assert_eq!(filtered, vec![0b001, 0b010, 0b100, 0b011, 0b101, 0b110]);
        // Grouped by ascending size, ascending mask within size.
        for w in filtered.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(a.count_ones() < b.count_ones() || (a.count_ones() == b.count_ones() && a < b));
        }
    }

    #[test]
    fn enumerate_size_filter_counts_match_binomials() {
        for n in 0..=6 {
            for min in 0..=n {
                for max in min..=n {
                    let got = enumerate_subsets(n, Some((min, max))).unwrap().count() as u64;
                    let want: u64 = (min..=max).map(|s| binomial(n, s)).sum();
                    assert_eq!(got, want, "n={n} sizes {min}..={max}");
                }
            }
        }
    }

    #[test]
    fn enumeration_guard_refuses_huge_sweeps() {
        assert!(matches!(
            enumerate_subsets(31, None),
            Err(Error::EnumerationGuard { .. })
        ));
        // A narrow filter on a big universe is fine: C(40, 2) masks only.
        assert!(enumerate_subsets(40, Some((0, 2))).is_ok());
        // The forced variant hands back an iterator regardless of volume.
        let mut it = enumerate_subsets_forced(31, None).unwrap();
        assert_eq!(it.next(), Some(0));
    }

    #[test]
    fn submask_enumeration_is_complete() {
        let mask = 0b101100u64;
        let subs: Vec<u64> = submasks(mask).collect();
        assert_eq!(subs.len(), 1 << mask.count_ones());
        assert!(subs.iter().all(|s| s & !mask == 0));
        let mut dedup = subs.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), subs.len());
        assert!(subs.contains(&0));
        assert!(subs.contains(&mask));
    }
}
