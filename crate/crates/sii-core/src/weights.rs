//! Interaction-to-coalition weights (λ) and least-squares kernel weights (μ).
//!
//! * `λ(k, ℓ)` is the coefficient with which an order-`k` interaction score
//!   contributes to the value of a coalition containing exactly `ℓ` of its
//!   members. It is a Bernoulli-number sum and is kept exact: identities such
//!   as `λ(k, k) = 0` for `k > 1` must hold with no rounding at all, because
//!   they decide which design-matrix entries vanish.
//! * `μ_k(t)` is the diagonal regression weight for a coalition of size `t`
//!   when fitting interactions of order `k`; sizes outside the band
//!   `k <= t <= n-k` get a large pseudo-infinite weight `μ_inf` that enforces
//!   those rows as soft constraints.

use num::rational::BigRational;
use num::traits::Zero;

use crate::bernoulli::{rational_to_f64, BernoulliTable};
use crate::coalition::binomial;
use crate::error::{Error, Result};

/// Exact table of λ(k, ℓ) for `0 <= ℓ <= k <= k_max`.
#[derive(Debug, Clone)]
pub struct LambdaWeights {
    /// `table[k][l]` = λ(k, ℓ) exactly.
    table: Vec<Vec<BigRational>>,
    /// Same values rounded once to f64 for matrix assembly.
    table_f64: Vec<Vec<f64>>,
}

impl LambdaWeights {
    /// Precomputes λ up to order `k_max`:
    /// `λ(k, 0) = 0` and `λ(k, ℓ) = sum_{r=1}^{ℓ} C(ℓ, r) · B_{k-r}`.
    pub fn new(k_max: usize) -> Self {
        let bernoulli = BernoulliTable::new(k_max.saturating_sub(1));
        let mut table = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let mut row = Vec::with_capacity(k + 1);
            for l in 0..=k {
                let mut acc = BigRational::zero();
                for r in 1..=l {
                    let c = BigRational::from_integer(binomial(l, r).into());
                    acc += c * bernoulli.get(k - r).expect("table covers k_max - 1");
                }
                row.push(acc);
            }
            table.push(row);
        }
        let table_f64 = table
            .iter()
            .map(|row| row.iter().map(rational_to_f64).collect())
            .collect();
        Self { table, table_f64 }
    }

    /// Largest order covered.
    pub fn k_max(&self) -> usize {
        self.table.len() - 1
    }

    /// Exact λ(k, ℓ).
    ///
    /// # Errors
    ///
    /// Returns an error unless `ℓ <= k <= k_max`.
    pub fn rational(&self, k: usize, l: usize) -> Result<&BigRational> {
        self.table
            .get(k)
            .and_then(|row| row.get(l))
            .ok_or(Error::TableOutOfRange { index: k.max(l), size: self.table.len() })
    }

    /// λ(k, ℓ) as `f64` (the only place rounding happens).
    ///
    /// # Errors
    ///
    /// Returns an error unless `ℓ <= k <= k_max`.
    pub fn value(&self, k: usize, l: usize) -> Result<f64> {
        self.table_f64
            .get(k)
            .and_then(|row| row.get(l))
            .copied()
            .ok_or(Error::TableOutOfRange { index: k.max(l), size: self.table.len() })
    }

    /// Infallible λ(k, ℓ) for hot loops that already validated `k`.
    ///
    /// # Panics
    ///
    /// Panics if `ℓ > k` or `k > k_max`.
    pub fn value_unchecked(&self, k: usize, l: usize) -> f64 {
        self.table_f64[k][l]
    }
}

/// Kernel weight `μ_k(t)` for a size-`t` coalition when fitting order `k`
/// over `n` players.
///
/// Inside the band `k <= t <= n-k` the weight is `1 / C(n-2k, t-k)`; outside
/// it the pseudo-infinite weight `mu_inf` applies. When `n < 2k` the band is
/// empty and every size receives `mu_inf` (callers are expected to warn once
/// and proceed).
pub fn kernel_weight_mu(k: usize, t: usize, n: usize, mu_inf: f64) -> f64 {
    if t < k || t + k > n {
        mu_inf
    } else {
        1.0 / binomial(n - 2 * k, t - k) as f64
    }
}
