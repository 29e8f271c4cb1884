//! Cooperative games: the evaluation oracle trait and generic wrappers.
//!
//! A game assigns a real value to every coalition of `{1, ..., n}`.
//! Coalitions are passed as raw `u64` bitmasks (bit `i - 1` ⇔ player `i`);
//! bits at positions `>= n` must be zero. Implementations must be cheap to
//! call and safe to share across threads (`Sync`), since estimators may be
//! driven concurrently.

mod lookup;
mod soum;

pub use lookup::{load_lookup_game, lookup_game_to_json, store_lookup_game, LookupGame};
pub use soum::{generate_soum, load_soum_game, soum_game_to_json, store_soum_game, SoumGame, SoumTerm};

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

/// Evaluation oracle for a cooperative game `ν: 2^N -> ℝ`.
pub trait GameOracle: Sync {
    /// Number of players.
    fn n(&self) -> usize;

    /// Value of the coalition encoded by `mask`.
    fn evaluate(&self, mask: u64) -> f64;
}

impl<G: GameOracle + ?Sized> GameOracle for &G {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn evaluate(&self, mask: u64) -> f64 {
        (**self).evaluate(mask)
    }
}

/// Mean-centering wrapper: subtracts `ν(∅)` from every value, so the wrapped
/// game satisfies `ν(∅) = 0` exactly.
///
/// Index computations in this crate assume centered games; estimators and
/// oracles apply this wrapper themselves, evaluating `ν(∅)` once eagerly.
pub struct CenteredGame<G> {
    inner: G,
    offset: f64,
}

impl<G: GameOracle> CenteredGame<G> {
    /// Wraps `inner`, evaluating `ν(∅)` once.
    pub fn new(inner: G) -> Self {
        let offset = inner.evaluate(0);
        Self { inner, offset }
    }

    /// The subtracted baseline `ν(∅)`.
    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl<G: GameOracle> GameOracle for CenteredGame<G> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn evaluate(&self, mask: u64) -> f64 {
        if mask == 0 {
            0.0
        } else {
            self.inner.evaluate(mask) - self.offset
        }
    }
}

/// Budget-accounting wrapper: memoizes values per distinct coalition and
/// counts how many distinct coalitions have been charged.
///
/// Repeated evaluations of the same coalition hit the cache and are free;
/// the counter increases by exactly one per distinct mask. The counter uses
/// an atomic so concurrent readers never block.
pub struct CountingGame<G> {
    inner: G,
    cache: Mutex<HashMap<u64, f64>>,
    distinct: AtomicU64,
}

impl<G: GameOracle> CountingGame<G> {
    /// Wraps `inner` with an empty cache.
    pub fn new(inner: G) -> Self {
        Self { inner, cache: Mutex::new(HashMap::new()), distinct: AtomicU64::new(0) }
    }

    /// Number of distinct coalitions evaluated so far.
    pub fn eval_count(&self) -> u64 {
        self.distinct.load(Ordering::Relaxed)
    }

    /// Whether a coalition has already been charged.
    pub fn is_cached(&self, mask: u64) -> bool {
        self.cache.lock().expect("cache lock poisoned").contains_key(&mask)
    }
}

impl<G: GameOracle> GameOracle for CountingGame<G> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn evaluate(&self, mask: u64) -> f64 {
        let mut cache = self.cache.lock().expect("cache lock poisoned");
        if let Some(&v) = cache.get(&mask) {
            return v;
        }
        let v = self.inner.evaluate(mask);
        cache.insert(mask, v);
        self.distinct.fetch_add(1, Ordering::Relaxed);
        v
    }
}
