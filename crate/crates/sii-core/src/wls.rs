//! Weighted least squares on coalition design matrices.
//!
//! The estimators express interaction indices as the solution of
//! `min_φ Σ_T w'_T (y_T - Σ_S X[T,S] φ_S)²` with the Bernoulli design rule
//! `X[T,S] = λ(|S|, |T∩S|)`. Row weights mix kernel weights `μ` (including
//! the large `μ_∞` stand-in, which drives condition numbers to ~`μ_∞`) with
//! sampling weights, so the solver factorizes `√W·X` orthogonally instead
//! of forming normal equations, and falls back to a minimum-norm SVD
//! solution when the system is under-determined or rank-deficient.

use nalgebra::DMatrix;

use crate::coalition::{enumerate_subsets, universe_mask};
use crate::error::{Error, Result};
use crate::weights::LambdaWeights;

/// One observation: coalition `T`, response `y_T`, and total row weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlsRow {
    /// Coalition mask `T`.
    pub mask: u64,
    /// Response `y_T`.
    pub response: f64,
    /// Row weight `w'_T > 0`.
    pub weight: f64,
}

/// A weighted-least-squares problem over interaction columns.
#[derive(Debug, Clone)]
pub struct WlsSystem {
    n: usize,
    columns: Vec<u64>,
    rows: Vec<WlsRow>,
}

/// All interaction masks of one size, in ascending mask order (the
/// deterministic column order used everywhere).
///
/// # Errors
///
/// Returns an error if `order` is out of range for `n` players.
pub fn interaction_columns(n: usize, order: usize) -> Result<Vec<u64>> {
    if order == 0 || order > n {
        return Err(Error::OrderOutOfRange { order, n });
    }
    Ok(enumerate_subsets(n, Some((order, order)))?.collect())
}

/// Dense design matrix for the given coalitions against all interactions of
/// one size: `X[T,S] = λ(|S|, |T∩S|)`.
///
/// # Errors
///
/// Returns an error if `order` is out of range.
pub fn build_design_matrix(n: usize, coalitions: &[u64], order: usize) -> Result<DMatrix<f64>> {
    let columns = interaction_columns(n, order)?;
    let lambda = LambdaWeights::new(order);
    Ok(design_from_columns(coalitions, &columns, &lambda))
}

/// Design matrix for explicit row and column masks (columns may mix sizes,
/// as in the stacked single-solve estimator).
pub fn design_from_columns(rows: &[u64], columns: &[u64], lambda: &LambdaWeights) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), columns.len(), |i, j| {
        let s = columns[j];
        lambda.value_unchecked(s.count_ones() as usize, (rows[i] & s).count_ones() as usize)
    })
}

impl WlsSystem {
    /// Creates a system over explicit interaction columns.
    ///
    /// # Errors
    ///
    /// Returns an error if a column mask is empty or out of range.
    pub fn new(n: usize, columns: Vec<u64>) -> Result<Self> {
        for &s in &columns {
            if s == 0 || s & !universe_mask(n) != 0 {
                return Err(Error::MaskOutOfRange { mask: s, n });
            }
        }
        Ok(Self { n, columns, rows: Vec::new() })
    }

    /// Appends an observation row.
    ///
    /// # Errors
    ///
    /// Returns an error if the mask is out of range, the weight is not
    /// strictly positive and finite, or the response is non-finite.
    pub fn push_row(&mut self, mask: u64, response: f64, weight: f64) -> Result<()> {
        if mask & !universe_mask(self.n) != 0 {
            return Err(Error::MaskOutOfRange { mask, n: self.n });
        }
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::NonFinite { context: "WLS row weight" });
        }
        if !response.is_finite() {
            return Err(Error::NonFinite { context: "WLS response" });
        }
        self.rows.push(WlsRow { mask, response, weight });
        Ok(())
    }

    /// The interaction columns.
    pub fn columns(&self) -> &[u64] {
        &self.columns
    }

    /// The observation rows.
    pub fn rows(&self) -> &[WlsRow] {
        &self.rows
    }

    /// Solves for the interaction estimates, aligned with [`columns`].
    ///
    /// [`columns`]: WlsSystem::columns
    ///
    /// # Errors
    ///
    /// Returns an error if the system has no rows or the factorization
    /// fails.
    pub fn solve(&self) -> Result<Vec<f64>> {
        if self.rows.is_empty() {
            return Err(Error::SolveFailed { reason: "system has no rows".into() });
        }
        let max_order =
            self.columns.iter().map(|s| s.count_ones() as usize).max().unwrap_or(1);
        let lambda = LambdaWeights::new(max_order);
        let row_masks: Vec<u64> = self.rows.iter().map(|r| r.mask).collect();
        let x = design_from_columns(&row_masks, &self.columns, &lambda);
        let weights: Vec<f64> = self.rows.iter().map(|r| r.weight).collect();
        let responses: Vec<f64> = self.rows.iter().map(|r| r.response).collect();
        solve_weighted_least_squares(&x, &weights, &responses)
    }
}

/// Minimizes `‖√W (X φ - y)‖₂`, returning the minimum-norm minimizer when
/// the problem is rank-deficient or under-determined.
///
/// A QR factorization of `√W·X` is used when the system is square-or-tall
/// with a healthy triangular factor; otherwise the solve falls back to a
/// singular value decomposition with small singular values zeroed.
///
/// # Errors
///
/// Returns an error on dimension mismatch, non-finite or non-positive
/// weights, non-finite responses, or factorization failure.
pub fn solve_weighted_least_squares(
    x: &DMatrix<f64>,
    weights: &[f64],
    y: &[f64],
) -> Result<Vec<f64>> {
    if y.len() != x.nrows() {
        return Err(Error::SolveFailed {
            reason: format!("dimension mismatch: {} rows, {} responses", x.nrows(), y.len()),
        });
    }
    let rhs = DMatrix::from_column_slice(y.len(), 1, y);
    let solution = solve_weighted_least_squares_multi(x, weights, &rhs)?;
    Ok(solution.column(0).iter().copied().collect())
}

/// [`solve_weighted_least_squares`] for several response vectors at once
/// (one per column of `ys`), sharing a single factorization of `√W·X`.
/// Returns the solutions as columns, aligned with the columns of `ys`.
///
/// # Errors
///
/// Same conditions as the single-response solver.
pub fn solve_weighted_least_squares_multi(
    x: &DMatrix<f64>,
    weights: &[f64],
    ys: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (m, c) = x.shape();
    if m == 0 || c == 0 || ys.ncols() == 0 {
        return Err(Error::SolveFailed { reason: "empty system".into() });
    }
    if weights.len() != m || ys.nrows() != m {
        return Err(Error::SolveFailed {
            reason: format!(
                "dimension mismatch: {m} rows, {} weights, {} response rows",
                weights.len(),
                ys.nrows()
            ),
        });
    }
    if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(Error::NonFinite { context: "WLS weight" });
    }
    if ys.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "WLS response" });
    }

    let mut scaled = x.clone();
    let mut rhs = ys.clone();
    for i in 0..m {
        let root = weights[i].sqrt();
        for j in 0..c {
            scaled[(i, j)] *= root;
        }
        for j in 0..rhs.ncols() {
            rhs[(i, j)] *= root;
        }
    }

    if m >= c {
        if let Some(solution) = try_qr(scaled.clone(), rhs.clone()) {
            return Ok(solution);
        }
    }
    svd_min_norm(scaled, rhs)
}

/// Thin-QR least squares; `None` if the triangular factor looks
/// rank-deficient (diagonal spread beyond ~1e12).
fn try_qr(scaled: DMatrix<f64>, mut rhs: DMatrix<f64>) -> Option<DMatrix<f64>> {
    let c = scaled.ncols();
    let qr = scaled.qr();
    let r = qr.r();
    let diag_max = (0..c).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let diag_min = (0..c).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if diag_max <= 0.0 || diag_min < diag_max * 1e-12 {
        return None;
    }
    qr.q_tr_mul(&mut rhs);
    let reduced = rhs.rows(0, c).into_owned();
    r.solve_upper_triangular(&reduced)
}

fn svd_min_norm(scaled: DMatrix<f64>, rhs: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (m, c) = scaled.shape();
    let svd = scaled.svd(true, true);
    let sv_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = sv_max * m.max(c) as f64 * f64::EPSILON;
    svd.solve(&rhs, eps).map_err(|e| Error::SolveFailed { reason: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_sv;
    use crate::game::{GameOracle, LookupGame};
    use crate::weights::kernel_weight_mu;
    use approx::assert_abs_diff_eq;

    #[test]
    fn order_one_design_is_the_membership_matrix() {
        let x = build_design_matrix(3, &[0b000, 0b101, 0b111], 1).unwrap();
        assert_eq!(x.nrows(), 3);
        assert_eq!(x.ncols(), 3);
        assert_eq!(x.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0]);
        assert_eq!(x.row(1).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 1.0]);
        assert_eq!(x.row(2).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn order_two_design_hits_minus_half_on_single_overlap() {
        // Columns for n=3, order 2: {1,2}, {1,3}, {2,3}.
        let x = build_design_matrix(3, &[0b001, 0b011, 0b111], 2).unwrap();
        // T={1}: overlap 1 with {1,2} and {1,3}, 0 with {2,3}.
        assert_eq!(x.row(0).iter().copied().collect::<Vec<_>>(), vec![-0.5, -0.5, 0.0]);
        // T={1,2}: overlaps 2, 1, 1.
        assert_eq!(x.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, -0.5, -0.5]);
        // T=N: all overlaps are 2.
        assert_eq!(x.row(2).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn order_three_design_vanishes_on_full_overlap() {
        let x = build_design_matrix(4, &[0b0111], 3).unwrap();
        // Column order: {1,2,3}, {1,2,4}, {1,3,4}, {2,3,4} — overlap with
        // T={1,2,3} is 3, 2, 2, 2.
        let lambda = LambdaWeights::new(3);
        assert_eq!(x[(0, 0)], 0.0);
        assert_eq!(x[(0, 1)], lambda.value_unchecked(3, 2));
        assert!((x[(0, 1)] + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn one_by_one_system() {
        let x = DMatrix::from_row_slice(1, 1, &[1.0]);
        let phi = solve_weighted_least_squares(&x, &[1.0], &[3.0]).unwrap();
        assert_abs_diff_eq!(phi[0], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn splitting_a_row_weight_does_not_change_the_solution() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let dup = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0]);
        let a = solve_weighted_least_squares(&x, &[2.0, 3.0, 1.0], &[1.0, 0.5, -1.0]).unwrap();
        let b =
            solve_weighted_least_squares(&dup, &[2.0, 1.5, 1.5, 1.0], &[1.0, 0.5, 0.5, -1.0])
                .unwrap();
        assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-12);
        assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-12);
    }

    #[test]
    fn underdetermined_system_returns_the_minimum_norm_solution() {
        // One equation, two unknowns: x1 + x2 = 2 → (1, 1).
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let phi = solve_weighted_least_squares(&x, &[1.0], &[2.0]).unwrap();
        assert_abs_diff_eq!(phi[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phi[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_tall_system_falls_back_to_minimum_norm() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let phi = solve_weighted_least_squares(&x, &[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(phi[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(phi[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = DMatrix::from_row_slice(1, 1, &[1.0]);
        assert!(solve_weighted_least_squares(&x, &[0.0], &[1.0]).is_err());
        assert!(solve_weighted_least_squares(&x, &[-1.0], &[1.0]).is_err());
        assert!(solve_weighted_least_squares(&x, &[1.0], &[f64::NAN]).is_err());
        assert!(solve_weighted_least_squares(&x, &[1.0, 1.0], &[1.0]).is_err());

        let mut system = WlsSystem::new(3, vec![0b001]).unwrap();
        assert!(system.solve().is_err());
        assert!(system.push_row(0b01, 1.0, 0.0).is_err());
        assert!(system.push_row(0b01, f64::INFINITY, 1.0).is_err());
        system.push_row(0b01, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(system.solve().unwrap()[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn full_enumeration_order_one_recovers_shapley_values() {
        let n = 6;
        let game = LookupGame::random_centered(n, 17).unwrap();
        let mu_inf = 1e7;
        let mut system = WlsSystem::new(n, interaction_columns(n, 1).unwrap()).unwrap();
        for mask in 0..(1u64 << n) {
            let t = mask.count_ones() as usize;
            system
                .push_row(mask, game.evaluate(mask), kernel_weight_mu(1, t, n, mu_inf))
                .unwrap();
        }
        let phi = system.solve().unwrap();
        let sv = exact_sv(&game).unwrap();
        for (j, &col) in system.columns().iter().enumerate() {
            assert_abs_diff_eq!(phi[j], sv.get(col).unwrap(), epsilon = 1e-6);
        }
    }
}
