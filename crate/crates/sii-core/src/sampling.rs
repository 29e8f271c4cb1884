//! Budgeted coalition sampling with the border trick.
//!
//! A budget of `b` distinct game evaluations is split into a deterministic
//! part — all coalitions of extreme sizes `t < q0` or `t > n - q0`, each
//! charged once with weight 1 — and a Monte Carlo part that draws the middle
//! band by size (renormalized size distribution `q`, then a uniform subset
//! of that size). Duplicates accumulate weight instead of re-charging, so
//! the charged budget always equals the number of distinct coalitions.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::coalition::{binomial, enumerate_subsets, MAX_PLAYERS};
use crate::error::{Error, Result};
use crate::jsonio;

/// Distribution over coalition sizes used by the Monte Carlo part.
#[derive(Debug, Clone)]
pub struct SamplingWeights {
    q: Vec<f64>,
}

impl SamplingWeights {
    /// The default size distribution `q(t) ∝ 1/(t(n-t))` for
    /// `1 ≤ t ≤ n-1`. Sizes 0 and `n` get no mass: the empty and grand
    /// coalitions are force-included deterministically.
    pub fn default_for(n: usize) -> Self {
        let q = (0..=n)
            .map(|t| if t == 0 || t == n { 0.0 } else { 1.0 / (t * (n - t)) as f64 })
            .collect();
        Self { q }
    }

    /// A custom size distribution (`q[t]` for `t = 0..=n`).
    ///
    /// # Errors
    ///
    /// Returns an error if any weight is negative or non-finite, the total
    /// mass is zero, or sizes 0 / `n` carry mass (they are always handled
    /// by forced inclusion).
    pub fn custom(q: Vec<f64>) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::InvalidSamplingWeights {
                reason: "need weights for sizes 0..=n with n >= 1".into(),
            });
        }
        let n = q.len() - 1;
        if q.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidSamplingWeights {
                reason: "weights must be finite and nonnegative".into(),
            });
        }
        if q[0] != 0.0 || q[n] != 0.0 {
            return Err(Error::InvalidSamplingWeights {
                reason: "sizes 0 and n are forced deterministically and must carry no mass".into(),
            });
        }
        if q.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidSamplingWeights { reason: "total mass is zero".into() });
        }
        Ok(Self { q })
    }

    /// Number of players the distribution is sized for.
    pub fn n(&self) -> usize {
        self.q.len() - 1
    }

    /// Raw (unnormalized) mass on size `t`.
    pub fn get(&self, t: usize) -> f64 {
        self.q[t]
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::InvalidSamplingWeights {
                reason: format!("weights sized for n = {}, game has n = {}", self.n(), n),
            });
        }
        Ok(())
    }

    fn band_sum(&self, q0: usize, n: usize) -> f64 {
        if q0 + q0 > n {
            return 0.0;
        }
        (q0..=n - q0).map(|t| self.q[t]).sum()
    }
}

/// A budgeted batch of distinct coalitions with importance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingBatch {
    n: usize,
    q0: usize,
    n_samples: usize,
    entries: Vec<(u64, f64)>,
}

#[derive(Serialize)]
struct BatchFile {
    q0: usize,
    n_samples: usize,
    coalitions: Vec<BatchEntryFile>,
}

#[derive(Serialize)]
struct BatchEntryFile {
    mask: u64,
    weight: f64,
}

impl SamplingBatch {
    /// Number of players.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Sampling order: sizes `< q0` (and `> n - q0`) were enumerated.
    pub fn q0(&self) -> usize {
        self.q0
    }

    /// Total Monte Carlo draws performed (duplicates included).
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Number of distinct coalitions (the charged budget).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether the batch is empty.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether size `t` belongs to the deterministic part.
    pub fn is_deterministic_size(&self, t: usize) -> bool {
        t < self.q0 || t + self.q0 > self.n
    }

    /// `(mask, weight)` pairs: deterministic part first (weight 1), then
    /// sampled coalitions in first-draw order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// The batch as a mask → weight map.
    pub fn to_map(&self) -> HashMap<u64, f64> {
        self.entries.iter().copied().collect()
    }

    /// Serializes the batch to its debug JSON form.
    ///
    /// # Errors
    ///
    /// Returns an error if serialization fails.
    pub fn to_json_string(&self) -> Result<String> {
        jsonio::to_json_string(&self.to_file())
    }

    /// Writes the debug JSON form to `path`.
    ///
    /// # Errors
    ///
    /// Returns an error if the write fails.
    pub fn write_json(&self, path: &Path) -> Result<()> {
        jsonio::write_json_file(path, &self.to_file())
    }

    fn to_file(&self) -> BatchFile {
        BatchFile {
            q0: self.q0,
            n_samples: self.n_samples,
            coalitions: self
                .entries
                .iter()
                .map(|&(mask, weight)| BatchEntryFile { mask, weight })
                .collect(),
        }
    }
}

/// Largest `q0` such that every size pair `(t, n-t)` with `t < q0` is worth
/// enumerating: the expected number of draws hitting the pair (under the
/// budget left at that point, with `q` renormalized over the shrinking band)
/// reaches the pair's coalition count. Sizes 0 and `n` are always promoted
/// first when the budget covers the two forced coalitions.
///
/// # Errors
///
/// Returns an error if `q` is not sized for `n`.
pub fn compute_sampling_order(budget: u64, q: &SamplingWeights, n: usize) -> Result<usize> {
    q.check_n(n)?;
    Ok(order_and_remaining(budget, q, n).0)
}

fn order_and_remaining(budget: u64, q: &SamplingWeights, n: usize) -> (usize, u64) {
    let mut b = budget;
    let mut q0 = 0usize;
    for t in 0..=n / 2 {
        if t == 0 {
            if b >= 2 {
                q0 = 1;
                b -= 2;
                continue;
            }
            break;
        }
        let band_sum = q.band_sum(t, n);
        if band_sum <= 0.0 {
            break;
        }
        let count = binomial(n, t) as f64;
        let expect_low = b as f64 * (q.get(t) / band_sum);
        let expect_high = b as f64 * (q.get(n - t) / band_sum);
        if expect_low < count || expect_high < count {
            break;
        }
        let cost = if t == n - t { binomial(n, t) } else { 2 * binomial(n, t) };
        q0 = t + 1;
        b -= cost;
    }
    (q0, b)
}

/// Draws a budgeted batch: enumerates the deterministic sizes implied by
/// [`compute_sampling_order`] with weight 1, then samples the middle band
/// until the remaining budget is filled with distinct coalitions (or the
/// band is exhausted). Sampled weights are `w_T = c_T / (n_samples · p(T))`
/// where `c_T` counts occurrences and `p(T)` is the draw probability, so
/// `Σ_T w_T g(T)` estimates the band total of `g` without bias.
///
/// # Errors
///
/// Returns an error if the budget cannot cover the two forced coalitions
/// (`∅` and `N`), `q` is not sized for `n`, or the band left to sample
/// carries no mass.
pub fn sample_batch(budget: u64, q: &SamplingWeights, n: usize, seed: u64) -> Result<SamplingBatch> {
    if n == 0 || n > MAX_PLAYERS {
        return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
    }
    q.check_n(n)?;
    if budget < 2 {
        return Err(Error::BudgetTooSmall {
            budget,
            reason: "the empty and grand coalitions are always included".into(),
        });
    }

    let (q0, remaining) = order_and_remaining(budget, q, n);
    let mut entries: Vec<(u64, f64)> = Vec::new();

    // Deterministic part: sizes t and n-t for every promoted t, weight 1.
    for t in 0..q0 {
        for mask in enumerate_subsets(n, Some((t, t)))? {
            entries.push((mask, 1.0));
        }
        if n - t != t {
            for mask in enumerate_subsets(n, Some((n - t, n - t)))? {
                entries.push((mask, 1.0));
            }
        }
    }

    // Monte Carlo part over the band [q0, n-q0].
    let band_empty = q0 + q0 > n;
    let mut n_samples = 0usize;
    if remaining > 0 && !band_empty {
        let band_sum = q.band_sum(q0, n);
        if band_sum <= 0.0 {
            return Err(Error::InvalidSamplingWeights {
                reason: format!("no mass on the sampled band [{q0}, {}]", n - q0),
            });
        }
        // Only sizes that can actually be drawn count toward the distinct
        // target, otherwise a zero-mass size would stall the loop.
        let sizes: Vec<usize> = (q0..=n - q0).filter(|&t| q.get(t) > 0.0).collect();
        let size_probs: Vec<f64> = sizes.iter().map(|&t| q.get(t) / band_sum).collect();
        let band_count: u128 = sizes.iter().map(|&t| binomial(n, t) as u128).sum();
        let target = (remaining as u128).min(band_count) as u64;

        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut occurrences: HashMap<u64, u64> = HashMap::new();
        let mut order: Vec<u64> = Vec::with_capacity(target as usize);
        while (order.len() as u64) < target {
            let mut u = rng.random::<f64>();
            let mut pick = sizes.len() - 1;
            for (i, &p) in size_probs.iter().enumerate() {
                if u < p {
                    pick = i;
                    break;
                }
                u -= p;
            }
            let t = sizes[pick];
            let mask = rand::seq::index::sample(&mut rng, n, t)
                .iter()
                .fold(0u64, |acc, i| acc | 1 << i);
            n_samples += 1;
            let count = occurrences.entry(mask).or_insert(0);
            if *count == 0 {
                order.push(mask);
            }
            *count += 1;
        }
        for mask in order {
            let t = mask.count_ones() as usize;
            let p = (q.get(t) / band_sum) / binomial(n, t) as f64;
            let weight = occurrences[&mask] as f64 / (n_samples as f64 * p);
            entries.push((mask, weight));
        }
    }

    Ok(SamplingBatch { n, q0, n_samples, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal replay of the sampling-order loop that renormalizes by
    /// mutating the weight vector each iteration, as an independent oracle
    /// for the closed-over-the-current-band arithmetic used above.
    fn replay_order(budget: u64, n: usize) -> usize {
        let mut q: Vec<f64> = SamplingWeights::default_for(n).q;
        let mut b = budget;
        let mut q0 = 0usize;
        for t in 0..=n / 2 {
            if t == 0 {
                if b < 2 {
                    break;
                }
                q0 = 1;
                b -= 2;
                continue;
            }
            let total: f64 = (t..=n - t).map(|s| q[s]).sum();
            if total <= 0.0 {
                break;
            }
            for s in t..=n - t {
                q[s] /= total;
            }
            let count = binomial(n, t) as f64;
            if (b as f64) * q[t] < count || (b as f64) * q[n - t] < count {
                break;
            }
            b -= if t == n - t { binomial(n, t) } else { 2 * binomial(n, t) };
            q0 = t + 1;
        }
        q0
    }

    #[test]
    fn order_matches_the_mutating_replay_on_a_grid() {
        for n in 2..=13 {
            let q = SamplingWeights::default_for(n);
            let max = 1u64 << n;
            for budget in [0, 1, 2, 3, 5, 20, 100, 500, 1000, max - 1, max, max + 7] {
                assert_eq!(
                    compute_sampling_order(budget, &q, n).unwrap(),
                    replay_order(budget, n),
                    "n = {n}, budget = {budget}"
                );
            }
        }
    }

    #[test]
    fn order_edge_cases() {
        let q = SamplingWeights::default_for(10);
        assert_eq!(compute_sampling_order(0, &q, 10).unwrap(), 0);
        assert_eq!(compute_sampling_order(1, &q, 10).unwrap(), 0);
        assert_eq!(compute_sampling_order(2, &q, 10).unwrap(), 1);
        // A full-power-set budget promotes every size.
        assert_eq!(compute_sampling_order(1 << 10, &q, 10).unwrap(), 6);
        assert_eq!(compute_sampling_order(u64::MAX, &q, 10).unwrap(), 6);
        let q11 = SamplingWeights::default_for(11);
        assert_eq!(compute_sampling_order(1 << 11, &q11, 11).unwrap(), 6);
        // Frozen value for the n=10, budget=100 configuration.
        assert_eq!(compute_sampling_order(100, &q, 10).unwrap(), 2);
    }

    #[test]
    fn full_budget_batch_is_the_whole_power_set() {
        let n = 5;
        let q = SamplingWeights::default_for(n);
        let batch = sample_batch(1 << n, &q, n, 123).unwrap();
        assert_eq!(batch.len(), 1 << n);
        assert_eq!(batch.n_samples(), 0);
        assert_eq!(batch.q0(), n / 2 + 1);
        let map = batch.to_map();
        for mask in 0..(1u64 << n) {
            assert_eq!(map.get(&mask), Some(&1.0), "mask {mask:#b}");
        }
    }

    #[test]
    fn forced_coalitions_and_budget_floor() {
        let q = SamplingWeights::default_for(8);
        assert!(matches!(
            sample_batch(1, &q, 8, 0),
            Err(Error::BudgetTooSmall { budget: 1, .. })
        ));
        for budget in [2u64, 3, 17] {
            let batch = sample_batch(budget, &q, 8, 9).unwrap();
            let map = batch.to_map();
            assert_eq!(map.get(&0), Some(&1.0));
            assert_eq!(map.get(&0xFF), Some(&1.0));
            assert_eq!(batch.len() as u64, budget);
        }
    }

    #[test]
    fn distinct_count_equals_charged_budget() {
        let q = SamplingWeights::default_for(10);
        for budget in [50u64, 100, 400, 1023] {
            let batch = sample_batch(budget, &q, 10, budget).unwrap();
            assert_eq!(batch.len() as u64, budget);
            let map = batch.to_map();
            assert_eq!(map.len(), batch.len(), "entries must be distinct");
            assert!(map.values().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn deterministic_sizes_are_complete_with_unit_weight() {
        let q = SamplingWeights::default_for(12);
        let batch = sample_batch(500, &q, 12, 7).unwrap();
        assert_eq!(batch.q0(), 3);
        let map = batch.to_map();
        for t in [0usize, 1, 2, 10, 11, 12] {
            assert!(batch.is_deterministic_size(t));
            let of_size: Vec<_> =
                map.iter().filter(|(m, _)| m.count_ones() as usize == t).collect();
            assert_eq!(of_size.len() as u64, binomial(12, t), "size {t}");
            assert!(of_size.iter().all(|(_, w)| **w == 1.0));
        }
        assert!(!batch.is_deterministic_size(3));
        assert!(!batch.is_deterministic_size(9));
    }

    #[test]
    fn same_seed_replays_bitwise() {
        let q = SamplingWeights::default_for(9);
        let a = sample_batch(120, &q, 9, 42).unwrap();
        let b = sample_batch(120, &q, 9, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_batch(120, &q, 9, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn custom_weight_validation() {
        assert!(SamplingWeights::custom(vec![0.0, 1.0, 0.0]).is_ok());
        assert!(SamplingWeights::custom(vec![0.5, 1.0, 0.0]).is_err());
        assert!(SamplingWeights::custom(vec![0.0, -1.0, 0.0]).is_err());
        assert!(SamplingWeights::custom(vec![0.0, f64::NAN, 0.0]).is_err());
        assert!(SamplingWeights::custom(vec![0.0, 0.0, 0.0]).is_err());
        assert!(SamplingWeights::custom(vec![0.0]).is_err());
        // Sized for the wrong n.
        let q = SamplingWeights::custom(vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(sample_batch(4, &q, 5, 0).is_err());
    }

    #[test]
    fn zero_mass_band_sizes_do_not_stall_the_draw_loop() {
        // Only singletons are drawable; the distinct target must cap at 3
        // even though the budget leaves room for more.
        let q = SamplingWeights::custom(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let batch = sample_batch(6, &q, 3, 11).unwrap();
        let map = batch.to_map();
        assert_eq!(map.len(), 5); // ∅, N, and the three singletons
        assert!(map.keys().all(|m| m.count_ones() != 2));
    }

    #[test]
    fn json_shape() {
        let q = SamplingWeights::default_for(4);
        let batch = sample_batch(16, &q, 4, 3).unwrap();
        let text = batch.to_json_string().unwrap();
        assert!(text.starts_with("{\"q0\":3,\"n_samples\":0,\"coalitions\":[{\"mask\":0,"));
        assert!(text.contains("\"weight\":1.0000000000000000e0"));
    }
}
