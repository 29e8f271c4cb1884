//! Numerical validators for two closed-form claims about the weighted
//! least-squares representation of SII.
//!
//! * **inverse** — the limit of the precision matrix `(XᵀWX)⁻¹` for the
//!   order-`k` design under kernel weights has the closed form returned by
//!   [`conjectured_precision_matrix`].
//! * **sii** — at full enumeration, the order-`k` SII equals the
//!   out-of-band closed-form term `Q_k·y⁻` plus the `μ_∞ → ∞` limit of the
//!   WLS fit of the in-band residuals, when the responses are the residuals
//!   left by the exact lower-order indices. The limit is evaluated exactly:
//!   because the in-band responses vanish on every pseudo-infinite row, the
//!   fitted vector factorizes into the conjectured precision matrix times a
//!   `μ_∞`-free moment vector.
//!
//! Both validators sweep a grid of `(n, k)` with `k ≤ ⌊n/2⌋`, record one
//! mean-squared error per cell, and pass only if every cell stays below
//! [`CONJECTURE_MSE_TOLERANCE`]. This module is the one place where an
//! explicit matrix inverse is formed — the claim under test is about the
//! inverse itself.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coalition::binomial;
use crate::error::{Error, Result};
use crate::estimation::sii_subset_weight;
use crate::exact::pairwise_sum;
use crate::game::{generate_soum, GameOracle};
use crate::values::InteractionValues;
use crate::weights::{kernel_weight_mu, LambdaWeights};
use crate::wls::{design_from_columns, interaction_columns};

/// Pass threshold for every validated mean-squared error.
pub const CONJECTURE_MSE_TOLERANCE: f64 = 1e-10;

/// Stand-in for the infinite kernel weight when the precision matrix is
/// inverted numerically, one order of magnitude above the estimator
/// default to tighten the limit.
pub const CONJECTURE_MU_INF: f64 = 1e7;

/// Largest `n` the full-enumeration validators accept (the order-`⌊n/2⌋`
/// design already has `2^n · C(n, ⌊n/2⌋)` entries).
pub const CONJECTURE_GUARD_N: usize = 12;

/// One validated grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureCase {
    /// Number of players.
    pub n: usize,
    /// Interaction order.
    pub k: usize,
    /// Observed mean-squared error (`∞` if the linear algebra failed).
    pub mse: f64,
}

/// Outcome of one validator sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    /// Which claim was validated: `"inverse"` or `"sii"`.
    pub id: String,
    /// Smallest `n` in the sweep.
    pub n_min: usize,
    /// Largest `n` in the sweep.
    pub n_max: usize,
    /// Largest order validated (`⌊n_max/2⌋`).
    pub k_max: usize,
    /// Per-cell errors.
    pub cases: Vec<ConjectureCase>,
    /// Largest observed error.
    pub max_mse: f64,
    /// `true` iff every cell is below [`CONJECTURE_MSE_TOLERANCE`].
    pub pass: bool,
}

impl ConjectureReport {
    fn from_cases(id: &str, n_min: usize, n_max: usize, cases: Vec<ConjectureCase>) -> Self {
        let max_mse = cases.iter().map(|c| c.mse).fold(0.0, f64::max);
        let k_max = cases.iter().map(|c| c.k).max().unwrap_or(0);
        let pass = !cases.is_empty() && max_mse < CONJECTURE_MSE_TOLERANCE;
        Self { id: id.to_string(), n_min, n_max, k_max, cases, max_mse, pass }
    }
}

fn check_grid(n_min: usize, n_max: usize) -> Result<()> {
    if n_min < 2 || n_max < n_min {
        return Err(Error::InvalidConfig {
            reason: format!("validation grid needs 2 <= n_min <= n_max, got {n_min}..={n_max}"),
        });
    }
    if n_max > CONJECTURE_GUARD_N {
        return Err(Error::InvalidConfig {
            reason: format!(
                "full-enumeration validation is limited to n <= {CONJECTURE_GUARD_N}, \
                 got n_max = {n_max}"
            ),
        });
    }
    Ok(())
}

/// The conjectured limit of the precision matrix `(XᵀWX)⁻¹` for the
/// order-`k` design: entry `(S₁, S₂)` is
/// `(-1)^{k-|S₁∩S₂|} / ((n-k+1) · C(n-k, k-|S₁∩S₂|))`, with rows and
/// columns ordered like [`interaction_columns`].
///
/// # Errors
///
/// Returns an error unless `1 ≤ k` and `n ≥ 2k`.
pub fn conjectured_precision_matrix(n: usize, k: usize) -> Result<DMatrix<f64>> {
    if k == 0 || n < 2 * k {
        return Err(Error::InvalidConfig {
            reason: format!("the closed-form precision matrix needs n >= 2k, got n={n}, k={k}"),
        });
    }
    let columns = interaction_columns(n, k)?;
    Ok(DMatrix::from_fn(columns.len(), columns.len(), |i, j| {
        let overlap = (columns[i] & columns[j]).count_ones() as usize;
        let sign = if (k - overlap) % 2 == 0 { 1.0 } else { -1.0 };
        sign / ((n - k + 1) as f64 * binomial(n - k, k - overlap) as f64)
    }))
}

/// Validates the closed form of the precision matrix on the grid
/// `n_min..=n_max`, `k = 1..=⌊n/2⌋`: builds `XᵀWX` from the fully
/// enumerated design, inverts it numerically, and records the elementwise
/// mean-squared error against [`conjectured_precision_matrix`]. A failed
/// inversion is reported as an infinite error for that cell instead of
/// aborting the sweep.
///
/// # Errors
///
/// Returns an error for an invalid grid or `mu_inf < 1`.
pub fn validate_conjecture_inverse(
    n_min: usize,
    n_max: usize,
    mu_inf: f64,
) -> Result<ConjectureReport> {
    check_grid(n_min, n_max)?;
    if !mu_inf.is_finite() || mu_inf < 1.0 {
        return Err(Error::InvalidConfig {
            reason: format!("mu_inf = {mu_inf} must be finite and >= 1"),
        });
    }
    let mut cases = Vec::new();
    for n in n_min..=n_max {
        let masks: Vec<u64> = (0..(1u64 << n)).collect();
        for k in 1..=n / 2 {
            let columns = interaction_columns(n, k)?;
            let lambda = LambdaWeights::new(k);
            let x = design_from_columns(&masks, &columns, &lambda);
            let mut xw = x.clone();
            for (i, &mask) in masks.iter().enumerate() {
                let w = kernel_weight_mu(k, mask.count_ones() as usize, n, mu_inf);
                for j in 0..xw.ncols() {
                    xw[(i, j)] *= w;
                }
            }
            let gram = x.transpose() * &xw;
            let conjectured = conjectured_precision_matrix(n, k)?;
            // Invert via a pivoted LU factorization: the direct cofactor
            // formulas nalgebra uses for tiny matrices cancel catastrophically
            // when every entry carries the ~μ_∞ offset.
            let mse = match gram.lu().try_inverse() {
                Some(inverse) => {
                    let diff = &inverse - &conjectured;
                    diff.iter().map(|d| d * d).sum::<f64>() / (diff.len() as f64)
                }
                None => f64::INFINITY,
            };
            cases.push(ConjectureCase { n, k, mse });
        }
    }
    Ok(ConjectureReport::from_cases("inverse", n_min, n_max, cases))
}

/// Validates the higher-order split on the grid `n_min..=n_max`,
/// `k = 1..=⌊n/2⌋`, against sums of unanimity games.
///
/// For each `n`, `n_soums` games with `m_terms` random terms are drawn.
/// The order-`k` responses are the exact residuals
/// `y_k = ν - Σ_{ℓ<k} X_ℓ·φ_ℓ` with analytic SII `φ_ℓ`; the candidate
/// estimate is the closed-form out-of-band term
/// `Σ_{T out-of-band} ω(S,T)·y_k(T)` plus the exact limit of the in-band
/// WLS fit, `A_k · X_kᵀ(μ_k ⊙ y⁺_k)`. Zeroed out-of-band responses make
/// the moment vector independent of `μ_∞`, so the limit reduces to the
/// conjectured precision matrix (validated separately by
/// [`validate_conjecture_inverse`]) — a finite stand-in weight would
/// instead leave an `O(‖ν‖/μ_∞)` bias that drowns the tolerance on games
/// at this scale. The recorded error per cell is the MSE against the
/// analytic order-`k` SII, averaged over the game instances.
///
/// # Errors
///
/// Returns an error for an invalid grid, `n_soums = 0`, or `m_terms = 0`.
pub fn validate_conjecture_sii(
    n_min: usize,
    n_max: usize,
    n_soums: usize,
    m_terms: usize,
    seed: u64,
) -> Result<ConjectureReport> {
    check_grid(n_min, n_max)?;
    if n_soums == 0 || m_terms == 0 {
        return Err(Error::InvalidConfig {
            reason: "conjecture validation needs at least one game with one term".into(),
        });
    }
    let mut cases = Vec::new();
    for n in n_min..=n_max {
        let masks: Vec<u64> = (0..(1u64 << n)).collect();
        let k_max = n / 2;
        let games: Vec<_> = (0..n_soums)
            .map(|j| generate_soum(n, m_terms, n, 0, seed.wrapping_add(j as u64)))
            .collect::<Result<_>>()?;
        let analytic: Vec<InteractionValues> =
            games.iter().map(|g| g.analytic_sii(k_max)).collect::<Result<_>>()?;
        // Residual responses, one column per game; order-0 residual is the
        // game itself (already centered: unanimity terms vanish on ∅).
        let mut residuals = DMatrix::from_fn(masks.len(), games.len(), |i, j| {
            games[j].evaluate(masks[i])
        });
        let lambda = LambdaWeights::new(k_max.max(1));
        let mut terms = Vec::new();
        for k in 1..=k_max {
            let columns = interaction_columns(n, k)?;
            let x = design_from_columns(&masks, &columns, &lambda);
            let in_band = |mask: u64| {
                let t = mask.count_ones() as usize;
                t >= k && t + k <= n
            };

            // Closed-form contribution of the out-of-band responses.
            let mut phi_minus = DMatrix::zeros(columns.len(), games.len());
            for (ci, &s_mask) in columns.iter().enumerate() {
                for j in 0..games.len() {
                    terms.clear();
                    for (ri, &t_mask) in masks.iter().enumerate() {
                        if !in_band(t_mask) {
                            terms.push(
                                residuals[(ri, j)] * sii_subset_weight(n, s_mask, t_mask)?,
                            );
                        }
                    }
                    phi_minus[(ci, j)] = pairwise_sum(&terms);
                }
            }

            // Exact limit of the in-band WLS fit: weight the in-band
            // residuals with the finite kernel weights (out-of-band rows
            // contribute exactly zero) and apply the conjectured precision
            // matrix.
            let mut weighted = residuals.clone();
            for (ri, &t_mask) in masks.iter().enumerate() {
                let w = if in_band(t_mask) {
                    kernel_weight_mu(k, t_mask.count_ones() as usize, n, 1.0)
                } else {
                    0.0
                };
                for j in 0..games.len() {
                    weighted[(ri, j)] *= w;
                }
            }
            let phi_plus = conjectured_precision_matrix(n, k)? * (x.transpose() * &weighted);

            let mut total = 0.0;
            for j in 0..games.len() {
                let mut sum_sq = 0.0;
                for (ci, &s_mask) in columns.iter().enumerate() {
                    let truth = analytic[j].get(s_mask).ok_or(Error::KeyMismatch {
                        order: k,
                        reason: "analytic SII table is missing a column".into(),
                    })?;
                    let diff = phi_minus[(ci, j)] + phi_plus[(ci, j)] - truth;
                    sum_sq += diff * diff;
                }
                total += sum_sq / columns.len() as f64;
            }
            cases.push(ConjectureCase { n, k, mse: total / games.len() as f64 });

            // Peel off the exact order-k contribution for the next order.
            let phi_exact = DMatrix::from_fn(columns.len(), games.len(), |ci, j| {
                analytic[j].get(columns[ci]).unwrap_or(0.0)
            });
            residuals -= &x * &phi_exact;
        }
    }
    Ok(ConjectureReport::from_cases("sii", n_min, n_max, cases))
}
