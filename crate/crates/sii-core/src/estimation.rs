//! Budgeted estimators for Shapley interaction indices.
//!
//! Four estimators share the same evaluation-budget accounting (distinct
//! coalitions charged once):
//!
//! * [`kernelshap_iq`] — iterative weighted-least-squares fits, one
//!   interaction order at a time, on residuals of the previous orders;
//!   orders ≥ 3 split rows into the kernel band (WLS) and the out-of-band
//!   rest (closed-form subset weights).
//! * [`inconsistent_kernelshap_iq`] — a single stacked WLS over all orders
//!   with order-1 kernel weights; exact for the Shapley values at `k = n`
//!   but with higher-order coordinates that do not converge to SII.
//! * [`permutation_sampling_sii`] — Monte Carlo over random player
//!   orderings, averaging discrete derivatives of consecutive windows.
//! * [`shap_iq_sii`] — direct weighted sum `Σ_T w_T ν(T) ω(S, T)` over a
//!   sampled batch using the exact SII subset weights.

use std::sync::Once;

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::coalition::{binomial, submasks, universe_mask};
use crate::error::{Error, Result};
use crate::exact::{aggregate_sii_to_ksii, pairwise_sum};
use crate::game::{CenteredGame, CountingGame, GameOracle};
use crate::sampling::{sample_batch, SamplingBatch, SamplingWeights};
use crate::values::{IndexKind, InteractionValues};
use crate::weights::{kernel_weight_mu, LambdaWeights};
use crate::wls::{design_from_columns, interaction_columns, solve_weighted_least_squares};

/// Configuration shared by the budgeted estimators.
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    /// Maximum interaction order `k`.
    pub order: usize,
    /// Evaluation budget (distinct coalitions).
    pub budget: u64,
    /// Stand-in weight for the infinite kernel weight outside the band.
    pub mu_inf: f64,
    /// Size distribution for the sampler; `None` uses the default
    /// `q(t) ∝ 1/(t(n-t))`.
    pub weights: Option<SamplingWeights>,
    /// RNG seed; identical configuration and seed reproduce estimates
    /// bitwise.
    pub seed: u64,
}

impl EstimatorConfig {
    /// A configuration with the default `μ_∞ = 1e6` and default sampling
    /// distribution.
    pub fn new(order: usize, budget: u64, seed: u64) -> Self {
        Self { order, budget, mu_inf: 1e6, weights: None, seed }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.order == 0 || self.order > n {
            return Err(Error::OrderOutOfRange { order: self.order, n });
        }
        if !self.mu_inf.is_finite() || self.mu_inf < 1.0 {
            return Err(Error::InvalidConfig {
                reason: format!("mu_inf = {} must be finite and >= 1", self.mu_inf),
            });
        }
        if self.budget < 2 {
            return Err(Error::BudgetTooSmall {
                budget: self.budget,
                reason: "estimators always evaluate the empty and grand coalitions".into(),
            });
        }
        Ok(())
    }

    fn sampling_weights(&self, n: usize) -> SamplingWeights {
        self.weights.clone().unwrap_or_else(|| SamplingWeights::default_for(n))
    }
}

/// Result of a budgeted estimator run: dense SII estimates for all orders
/// `1..=k`, their k-Shapley aggregation, and sampling provenance.
#[derive(Debug, Clone)]
pub struct Estimates {
    /// Shapley-interaction-index estimates, dense over sizes `1..=k`.
    pub sii: InteractionValues,
    /// Bernoulli-aggregated k-Shapley values of the same estimates.
    pub ksii: InteractionValues,
    /// Deterministic band boundary used by the sampler (0 when the
    /// estimator does not sample coalitions by size).
    pub q0: usize,
    /// Monte Carlo draws (coalition draws, or completed permutations for
    /// the permutation baseline).
    pub n_samples: usize,
}

static EMPTY_BAND_WARNING: Once = Once::new();

fn warn_if_band_empty(n: usize, order: usize) {
    if 2 * order > n {
        EMPTY_BAND_WARNING.call_once(|| {
            eprintln!(
                "warning: interaction order {order} exceeds n/2 for n = {n}; every \
                 coalition size lies outside the kernel band and receives the \
                 pseudo-infinite weight"
            );
        });
    }
}

/// The exact SII kernel weight `ω(S, T)` linking an interaction `S` to a
/// coalition `T`:
/// `ω = (-1)^{|S|-r} (n-|T|-|S|+r)! (|T|-r)! / (n-|S|+1)!` with
/// `r = |T ∩ S|`. Summed against all `2^n` game values it reproduces the
/// SII exactly.
///
/// # Errors
///
/// Returns an error if `S` is empty or a mask is out of range.
pub fn sii_subset_weight(n: usize, s_mask: u64, t_mask: u64) -> Result<f64> {
    let all = universe_mask(n);
    if s_mask == 0 || s_mask & !all != 0 {
        return Err(Error::MaskOutOfRange { mask: s_mask, n });
    }
    if t_mask & !all != 0 {
        return Err(Error::MaskOutOfRange { mask: t_mask, n });
    }
    let s = s_mask.count_ones() as usize;
    let r = (s_mask & t_mask).count_ones() as usize;
    let x = t_mask.count_ones() as usize - r;
    let sign = if (s - r) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign / ((n - s + 1) as f64 * binomial(n - s, x) as f64))
}

/// Evaluates the centered game on every batch coalition.
fn batch_responses<G: GameOracle>(
    game: &CenteredGame<G>,
    batch: &SamplingBatch,
) -> Result<(Vec<u64>, Vec<f64>, Vec<f64>)> {
    let mut masks = Vec::with_capacity(batch.len());
    let mut weights = Vec::with_capacity(batch.len());
    let mut responses = Vec::with_capacity(batch.len());
    for (mask, weight) in batch.iter() {
        let value = game.evaluate(mask);
        if !value.is_finite() {
            return Err(Error::NonFinite { context: "game value" });
        }
        masks.push(mask);
        weights.push(weight);
        responses.push(value);
    }
    Ok((masks, weights, responses))
}

/// KernelSHAP-IQ: iterative weighted-least-squares estimation of SII up to
/// order `k`, then k-Shapley aggregation.
///
/// One coalition batch is drawn for the whole run. For each order `ℓ`, the
/// responses are the residuals left by the lower orders; orders `ℓ ≤ 2` are
/// a direct WLS fit, while for `ℓ ≥ 3` coalitions outside the kernel band
/// `ℓ ≤ |T| ≤ n-ℓ` contribute through the closed-form subset weights
/// ([`sii_subset_weight`], importance-corrected) and the WLS fit sees their
/// responses zeroed under the pseudo-infinite weight.
///
/// Budgets beyond `2^n` degenerate to full enumeration.
///
/// # Errors
///
/// Returns an error on invalid configuration or solver failure.
pub fn kernelshap_iq<G: GameOracle>(game: &G, config: &EstimatorConfig) -> Result<Estimates> {
    let n = game.n();
    config.validate(n)?;
    warn_if_band_empty(n, config.order);
    let batch = sample_batch(config.budget, &config.sampling_weights(n), n, config.seed)?;
    let centered = CenteredGame::new(game);
    let (masks, weights, mut y) = batch_responses(&centered, &batch)?;
    let lambda = LambdaWeights::new(config.order);

    let mut sii = InteractionValues::new(n, config.order, IndexKind::Sii)?;
    for order in 1..=config.order {
        let columns = interaction_columns(n, order)?;
        let x = design_from_columns(&masks, &columns, &lambda);
        let row_weights: Vec<f64> = masks
            .iter()
            .zip(&weights)
            .map(|(&m, &w)| kernel_weight_mu(order, m.count_ones() as usize, n, config.mu_inf) * w)
            .collect();

        let phi: Vec<f64> = if order <= 2 {
            solve_weighted_least_squares(&x, &row_weights, &y)?
        } else {
            let in_band = |mask: u64| {
                let t = mask.count_ones() as usize;
                t >= order && t + order <= n
            };
            // Out-of-band part: closed-form subset weights, importance-
            // corrected by the sampling weights.
            let mut phi = Vec::with_capacity(columns.len());
            let mut terms = Vec::new();
            for &s_mask in &columns {
                terms.clear();
                for i in 0..masks.len() {
                    if !in_band(masks[i]) {
                        terms.push(weights[i] * y[i] * sii_subset_weight(n, s_mask, masks[i])?);
                    }
                }
                phi.push(pairwise_sum(&terms));
            }
            // In-band part: WLS with out-of-band responses zeroed.
            let y_plus: Vec<f64> = masks
                .iter()
                .zip(&y)
                .map(|(&m, &v)| if in_band(m) { v } else { 0.0 })
                .collect();
            let phi_plus = solve_weighted_least_squares(&x, &row_weights, &y_plus)?;
            for (a, b) in phi.iter_mut().zip(&phi_plus) {
                *a += b;
            }
            phi
        };

        for (j, &s_mask) in columns.iter().enumerate() {
            sii.set(s_mask, phi[j])?;
        }
        let fitted = &x * DVector::from_column_slice(&phi);
        for (v, f) in y.iter_mut().zip(fitted.iter()) {
            *v -= f;
        }
    }

    let ksii = aggregate_sii_to_ksii(&sii)?;
    Ok(Estimates { sii, ksii, q0: batch.q0(), n_samples: batch.n_samples() })
}

/// Inconsistent KernelSHAP-IQ: one stacked WLS over all interaction orders
/// `1..=k` with order-1 kernel weights on every row.
///
/// At `k = n` and full budget the order-1 coordinates are exactly the
/// Shapley values; higher-order coordinates are reported as-is but are not
/// consistent SII estimates.
///
/// # Errors
///
/// Returns an error on invalid configuration or solver failure.
pub fn inconsistent_kernelshap_iq<G: GameOracle>(
    game: &G,
    config: &EstimatorConfig,
) -> Result<Estimates> {
    let n = game.n();
    config.validate(n)?;
    warn_if_band_empty(n, config.order);
    let batch = sample_batch(config.budget, &config.sampling_weights(n), n, config.seed)?;
    let centered = CenteredGame::new(game);
    let (masks, weights, y) = batch_responses(&centered, &batch)?;
    let lambda = LambdaWeights::new(config.order);

    let mut columns = Vec::new();
    for order in 1..=config.order {
        columns.extend(interaction_columns(n, order)?);
    }
    let x = design_from_columns(&masks, &columns, &lambda);
    let row_weights: Vec<f64> = masks
        .iter()
        .zip(&weights)
        .map(|(&m, &w)| kernel_weight_mu(1, m.count_ones() as usize, n, config.mu_inf) * w)
        .collect();
    let phi = solve_weighted_least_squares(&x, &row_weights, &y)?;

    let mut sii = InteractionValues::new(n, config.order, IndexKind::Sii)?;
    for (j, &s_mask) in columns.iter().enumerate() {
        sii.set(s_mask, phi[j])?;
    }
    let ksii = aggregate_sii_to_ksii(&sii)?;
    Ok(Estimates { sii, ksii, q0: batch.q0(), n_samples: batch.n_samples() })
}

/// Permutation-sampling baseline for SII.
///
/// Draws random player orderings; every set of `s ≤ k` players that appears
/// consecutively in an ordering contributes one discrete derivative
/// `Δ_S(u)` (with `u` the players before the window) to the running mean
/// for `S`. The budget counts distinct game evaluations through a per-run
/// cache; an update whose evaluations no longer fit stops the run without
/// being applied.
///
/// # Errors
///
/// Returns an error if `k` is out of range or the budget is below 2.
pub fn permutation_sampling_sii<G: GameOracle>(
    game: &G,
    order: usize,
    budget: u64,
    seed: u64,
) -> Result<Estimates> {
    let n = game.n();
    if order == 0 || order > n {
        return Err(Error::OrderOutOfRange { order, n });
    }
    if budget < 2 {
        return Err(Error::BudgetTooSmall {
            budget,
            reason: "even a single window update needs the empty coalition and one value".into(),
        });
    }

    let counted = CountingGame::new(game);
    let centered = CenteredGame::new(&counted);
    let mut accum: std::collections::HashMap<u64, (f64, u64)> = std::collections::HashMap::new();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut permutation: Vec<usize> = (0..n).collect();
    let mut prefix = vec![0u64; n + 1];
    let mut completed_permutations = 0usize;

    'outer: loop {
        permutation.shuffle(&mut rng);
        for i in 0..n {
            prefix[i + 1] = prefix[i] | 1 << permutation[i];
        }
        for s in 1..=order {
            for i in 0..=n - s {
                let s_mask = prefix[i + s] ^ prefix[i];
                let u_mask = prefix[i];
                let uncached = submasks(s_mask)
                    .filter(|&l| {
                        let m = u_mask | l;
                        m != 0 && !counted.is_cached(m)
                    })
                    .count() as u64;
                if counted.eval_count() + uncached > budget {
                    break 'outer;
                }
                let delta = crate::exact::discrete_derivative(&centered, s_mask, u_mask)?;
                let entry = accum.entry(s_mask).or_insert((0.0, 0));
                entry.0 += delta;
                entry.1 += 1;
            }
        }
        completed_permutations += 1;
        // All windows of every permutation are already cached; further
        // permutations would only repeat coalitions once the power set is
        // exhausted, but the mean still sharpens, so keep going until the
        // permutation no longer fits. A full cache means every later
        // permutation is free; cap the loop at a generous multiple to keep
        // full-budget runs finite.
        if counted.eval_count() >= budget.min(1 << n.min(62)) && completed_permutations >= 4 * n * n
        {
            break;
        }
    }

    let mut sii = InteractionValues::dense(n, order, IndexKind::Sii)?;
    for (mask, (total, count)) in accum {
        if count > 0 {
            sii.set(mask, total / count as f64)?;
        }
    }
    let ksii = aggregate_sii_to_ksii(&sii)?;
    Ok(Estimates { sii, ksii, q0: 0, n_samples: completed_permutations })
}

/// SHAP-IQ baseline: the direct weighted-sum estimator
/// `φ̂(S) = Σ_{T ∈ batch} w_T ν(T) ω(S, T)` with the exact subset weights.
/// Deterministic batch rows contribute their exact terms; sampled rows are
/// importance-corrected. At full budget the sum runs over the whole power
/// set and is exact.
///
/// # Errors
///
/// Returns an error on invalid configuration.
pub fn shap_iq_sii<G: GameOracle>(
    game: &G,
    order: usize,
    budget: u64,
    q: &SamplingWeights,
    seed: u64,
) -> Result<Estimates> {
    let n = game.n();
    if order == 0 || order > n {
        return Err(Error::OrderOutOfRange { order, n });
    }
    let batch = sample_batch(budget, q, n, seed)?;
    let centered = CenteredGame::new(game);
    let (masks, weights, y) = batch_responses(&centered, &batch)?;

    let mut sii = InteractionValues::new(n, order, IndexKind::Sii)?;
    let mut terms = Vec::with_capacity(masks.len());
    for l in 1..=order {
        for s_mask in interaction_columns(n, l)? {
            terms.clear();
            for i in 0..masks.len() {
                terms.push(weights[i] * y[i] * sii_subset_weight(n, s_mask, masks[i])?);
            }
            sii.set(s_mask, pairwise_sum(&terms))?;
        }
    }
    let ksii = aggregate_sii_to_ksii(&sii)?;
    Ok(Estimates { sii, ksii, q0: batch.q0(), n_samples: batch.n_samples() })
}
