//! Brute-force oracles: exact interaction indices by full enumeration.
//!
//! Every routine here tabulates the centered game once (`2^n` evaluations)
//! and then works on the dense table, so cost is exponential in `n`. A guard
//! refuses player counts above [`EXACT_GUARD_N`] unless the caller opts into
//! the `_forced` variant, which is still capped by the tabulation limit.

use crate::bernoulli::BernoulliTable;
use crate::coalition::{binomial, enumerate_subsets, submasks, universe_mask};
use crate::error::{Error, Result};
use crate::game::{CenteredGame, GameOracle, LookupGame};
use crate::values::{IndexKind, InteractionValues};
use crate::weights::LambdaWeights;

/// Largest `n` accepted by the exact oracles without forcing.
pub const EXACT_GUARD_N: usize = 20;

/// Sums a slice with pairwise (cascade) splitting, which keeps the rounding
/// error at `O(log n)` ulps instead of `O(n)` for long alternating sums.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// [`pairwise_sum`] over an iterator (buffers the terms).
pub fn pairwise_sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let terms: Vec<f64> = iter.into_iter().collect();
    pairwise_sum(&terms)
}

fn check_guard(n: usize, force: bool) -> Result<()> {
    if !force && n > EXACT_GUARD_N {
        return Err(Error::ExactOracleGuard { n, limit: EXACT_GUARD_N });
    }
    Ok(())
}

/// Tabulates the centered game (`ν(∅) = 0`) as a dense mask-indexed table.
fn tabulate_centered<G: GameOracle>(game: &G) -> Result<Vec<f64>> {
    let lookup = LookupGame::from_game(&CenteredGame::new(game))?;
    Ok(lookup.values().to_vec())
}

/// Discrete derivative `Δ_S(T) = Σ_{L ⊆ S} (-1)^{|S|-|L|} ν(T ∪ L)` read
/// from a dense table.
fn delta_from_table(table: &[f64], s_mask: u64, t_mask: u64) -> f64 {
    let s = s_mask.count_ones();
    let mut acc = 0.0;
    for l_mask in submasks(s_mask) {
        let sign = if (s - l_mask.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * table[(t_mask | l_mask) as usize];
    }
    acc
}

/// Discrete derivative of `game` for coalition `S` evaluated at `T`.
///
/// `Δ_S(T) = Σ_{L ⊆ S} (-1)^{|S|-|L|} ν(T ∪ L)`; `S` and `T` must be
/// disjoint. Costs `2^|S|` oracle calls.
///
/// # Errors
///
/// Returns an error if the masks overlap or fall outside the player set.
pub fn discrete_derivative<G: GameOracle>(game: &G, s_mask: u64, t_mask: u64) -> Result<f64> {
    let n = game.n();
    let all = universe_mask(n);
    if s_mask & !all != 0 {
        return Err(Error::MaskOutOfRange { mask: s_mask, n });
    }
    if t_mask & !all != 0 {
        return Err(Error::MaskOutOfRange { mask: t_mask, n });
    }
    if s_mask & t_mask != 0 {
        return Err(Error::InvalidConfig {
            reason: format!("derivative masks overlap: S = {s_mask:#b}, T = {t_mask:#b}"),
        });
    }
    let s = s_mask.count_ones();
    let mut acc = 0.0;
    for l_mask in submasks(s_mask) {
        let sign = if (s - l_mask.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * game.evaluate(t_mask | l_mask);
    }
    Ok(acc)
}

fn exact_sii_impl<G: GameOracle>(game: &G, k: usize, force: bool) -> Result<InteractionValues> {
    let n = game.n();
    check_guard(n, force)?;
    if k == 0 || k > n {
        return Err(Error::OrderOutOfRange { order: k, n });
    }
    let table = tabulate_centered(game)?;
    let all = universe_mask(n);

    let mut values = InteractionValues::new(n, k, IndexKind::Sii)?;
    let mut terms: Vec<f64> = Vec::with_capacity(1 << (n - 1));
    for s_mask in enumerate_subsets(n, Some((1, k)))? {
        let s = s_mask.count_ones() as usize;
        terms.clear();
        for t_mask in submasks(all ^ s_mask) {
            let t = t_mask.count_ones() as usize;
            // (n-s-t)! t! / (n-s+1)! == 1 / ((n-s+1) * C(n-s, t))
            let weight = 1.0 / ((n - s + 1) as f64 * binomial(n - s, t) as f64);
            terms.push(weight * delta_from_table(&table, s_mask, t_mask));
        }
        values.set(s_mask, pairwise_sum(&terms))?;
    }
    Ok(values)
}

/// Exact Shapley interaction indices for all coalitions of size `1..=k`.
///
/// `φ(S) = Σ_{T ⊆ N∖S} [(n-|S|-|T|)! |T|! / (n-|S|+1)!] Δ_S(T)` over the
/// mean-centered game.
///
/// # Errors
///
/// Returns an error if `n` exceeds [`EXACT_GUARD_N`] or `k` is out of range.
pub fn exact_sii<G: GameOracle>(game: &G, k: usize) -> Result<InteractionValues> {
    exact_sii_impl(game, k, false)
}

/// [`exact_sii`] without the player-count guard (tabulation limit still
/// applies).
///
/// # Errors
///
/// Returns an error if tabulation is infeasible or `k` is out of range.
pub fn exact_sii_forced<G: GameOracle>(game: &G, k: usize) -> Result<InteractionValues> {
    exact_sii_impl(game, k, true)
}

/// Exact Shapley values (interaction indices of order 1).
///
/// # Errors
///
/// Same conditions as [`exact_sii`].
pub fn exact_sv<G: GameOracle>(game: &G) -> Result<InteractionValues> {
    exact_sii(game, 1)
}

/// Aggregates Shapley interaction indices into k-Shapley values:
/// `Φ(S) = Σ_{S̃ ⊇ S, |S̃| ≤ k} B_{|S̃|-|S|} φ(S̃)` with Bernoulli numbers
/// `B_m` (`B_1 = -1/2`).
///
/// # Errors
///
/// Returns an error unless the input is a dense order-`k` SII set.
pub fn aggregate_sii_to_ksii(sii: &InteractionValues) -> Result<InteractionValues> {
    if sii.kind() != IndexKind::Sii {
        return Err(Error::InvalidConfig {
            reason: format!("aggregation expects SII input, got {}", sii.kind()),
        });
    }
    let n = sii.n();
    let k = sii.order();
    let expected: u128 = (1..=k).map(|j| binomial(n, j) as u128).sum();
    if sii.len() as u128 != expected {
        return Err(Error::KeyMismatch {
            order: k,
            reason: format!(
                "aggregation requires a dense value set ({} entries, found {})",
                expected,
                sii.len()
            ),
        });
    }

    let bernoulli = BernoulliTable::new(k.saturating_sub(1));
    let all = universe_mask(n);
    let mut out = InteractionValues::new(n, k, IndexKind::KSii)?;
    let mut terms: Vec<f64> = Vec::new();
    for (s_mask, _) in sii.iter() {
        let s = s_mask.count_ones() as usize;
        terms.clear();
        // Supersets S̃ = S ∪ A for A ⊆ N∖S with |A| ≤ k - s.
        for a_mask in enumerate_subsets(n, Some((0, k - s)))? {
            if a_mask & s_mask != 0 || a_mask & !all != 0 {
                continue;
            }
            let weight = bernoulli.get_f64(a_mask.count_ones() as usize)?;
            terms.push(weight * sii.get(s_mask | a_mask).expect("dense input"));
        }
        out.set(s_mask, pairwise_sum(&terms))?;
    }
    Ok(out)
}

fn exact_ksii_impl<G: GameOracle>(game: &G, k: usize, force: bool) -> Result<InteractionValues> {
    let sii = exact_sii_impl(game, k, force)?;
    aggregate_sii_to_ksii(&sii)
}

/// Exact k-Shapley values: order-`k` SII aggregated with Bernoulli weights.
///
/// Order 1 recovers the Shapley values; order `n` recovers the Möbius
/// transform.
///
/// # Errors
///
/// Same conditions as [`exact_sii`].
pub fn exact_ksii<G: GameOracle>(game: &G, k: usize) -> Result<InteractionValues> {
    exact_ksii_impl(game, k, false)
}

/// [`exact_ksii`] without the player-count guard.
///
/// # Errors
///
/// Returns an error if tabulation is infeasible or `k` is out of range.
pub fn exact_ksii_forced<G: GameOracle>(game: &G, k: usize) -> Result<InteractionValues> {
    exact_ksii_impl(game, k, true)
}

fn moebius_impl<G: GameOracle>(game: &G, force: bool) -> Result<InteractionValues> {
    let n = game.n();
    check_guard(n, force)?;
    let mut table = tabulate_centered(game)?;
    // In-place subset Möbius transform: after processing bit i, table[mask]
    // holds the alternating subset sum over the first i+1 coordinates.
    for i in 0..n {
        let bit = 1usize << i;
        for mask in 0..table.len() {
            if mask & bit != 0 {
                table[mask] -= table[mask ^ bit];
            }
        }
    }
    let mut values = InteractionValues::new(n, n, IndexKind::Moebius)?;
    for (mask, &value) in table.iter().enumerate().skip(1) {
        values.set(mask as u64, value)?;
    }
    Ok(values)
}

/// Möbius transform of the centered game:
/// `m(S) = Σ_{T ⊆ S} (-1)^{|S|-|T|} ν(T)`, dense over all nonempty `S`.
///
/// # Errors
///
/// Returns an error if `n` exceeds [`EXACT_GUARD_N`].
pub fn moebius_transform<G: GameOracle>(game: &G) -> Result<InteractionValues> {
    moebius_impl(game, false)
}

/// [`moebius_transform`] without the player-count guard.
///
/// # Errors
///
/// Returns an error if tabulation is infeasible.
pub fn moebius_transform_forced<G: GameOracle>(game: &G) -> Result<InteractionValues> {
    moebius_impl(game, true)
}

/// Value of the order-`k` additive approximation at coalition `T`.
///
/// For SII input this is `Σ_S φ(S) · λ(|S|, |S ∩ T|)`; for k-Shapley or
/// Möbius input it is the plain subset sum `Σ_{S ⊆ T} Φ(S)`. The two routes
/// agree on dense inputs, and at `order = n` both reproduce the centered
/// game exactly.
///
/// # Errors
///
/// Returns an error if `t_mask` is out of range.
pub fn k_additive_approx(values: &InteractionValues, t_mask: u64) -> Result<f64> {
    let n = values.n();
    if t_mask & !universe_mask(n) != 0 {
        return Err(Error::MaskOutOfRange { mask: t_mask, n });
    }
    match values.kind() {
        IndexKind::Sii => {
            let lambda = LambdaWeights::new(values.order());
            let terms = values
                .iter()
                .map(|(s_mask, v)| {
                    let s = s_mask.count_ones() as usize;
                    let l = (s_mask & t_mask).count_ones() as usize;
                    v * lambda.value_unchecked(s, l)
                })
                .collect::<Vec<f64>>();
            Ok(pairwise_sum(&terms))
        }
        IndexKind::KSii | IndexKind::Moebius => Ok(pairwise_sum_iter(
            values.iter().filter(|(s_mask, _)| s_mask & !t_mask == 0).map(|(_, v)| v),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{generate_soum, SoumGame, SoumTerm};
    use approx::assert_abs_diff_eq;

    /// Glove game: players 1 and 2 hold left gloves, player 3 a right one;
    /// a pair is worth 1.
    struct GloveGame;

    impl GameOracle for GloveGame {
        fn n(&self) -> usize {
            3
        }

        fn evaluate(&self, mask: u64) -> f64 {
            if mask & 0b100 != 0 && mask & 0b011 != 0 {
                1.0
            } else {
                0.0
            }
        }
    }

    #[test]
    fn pairwise_sum_matches_exact_totals() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum_iter([1.5, -0.5]), 1.0);
    }

    #[test]
    fn discrete_derivative_on_unanimity() {
        let game = SoumGame::new(3, vec![SoumTerm { mask: 0b011, coefficient: 1.0 }]).unwrap();
        // Δ_{1,2}(∅) = ν(12) - ν(1) - ν(2) + ν(∅) = 1.
        assert_abs_diff_eq!(discrete_derivative(&game, 0b011, 0).unwrap(), 1.0);
        // Δ_{1}(∅) = ν(1) - ν(∅) = 0; Δ_{1}({2}) = ν(12) - ν(2) = 1.
        assert_abs_diff_eq!(discrete_derivative(&game, 0b001, 0).unwrap(), 0.0);
        assert_abs_diff_eq!(discrete_derivative(&game, 0b001, 0b010).unwrap(), 1.0);
        assert!(discrete_derivative(&game, 0b011, 0b010).is_err());
        assert!(discrete_derivative(&game, 0b1000, 0).is_err());
    }

    #[test]
    fn shapley_values_of_the_glove_game() {
        let sv = exact_sv(&GloveGame).unwrap();
        assert_abs_diff_eq!(sv.get(0b001).unwrap(), 1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sv.get(0b010).unwrap(), 1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sv.get(0b100).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_sii_matches_closed_form_on_soums() {
        let game = generate_soum(7, 15, 4, 1, 3).unwrap();
        let brute = exact_sii(&game, 3).unwrap();
        let analytic = game.analytic_sii(3).unwrap();
        assert!(brute.max_abs_diff(&analytic).unwrap() < 1e-12);
    }

    #[test]
    fn order_n_sii_aggregation_is_the_moebius_transform() {
        let game = crate::game::LookupGame::random_centered(4, 21).unwrap();
        let ksii = exact_ksii(&game, 4).unwrap();
        let moebius = moebius_transform(&game).unwrap();
        for (mask, m) in moebius.iter() {
            assert_abs_diff_eq!(ksii.get(mask).unwrap(), m, epsilon = 1e-10);
        }
    }

    #[test]
    fn order_one_aggregation_is_identity_on_shapley_values() {
        let game = crate::game::LookupGame::random_centered(5, 8).unwrap();
        let sv = exact_sv(&game).unwrap();
        let ksii = exact_ksii(&game, 1).unwrap();
        assert!(sv.max_abs_diff(&ksii).unwrap() < 1e-15);
    }

    #[test]
    fn moebius_of_a_two_player_game() {
        let game = crate::game::LookupGame::new(2, vec![0.0, 0.3, -0.8, 0.25]).unwrap();
        let m = moebius_transform(&game).unwrap();
        assert_abs_diff_eq!(m.get(0b01).unwrap(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(0b10).unwrap(), -0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(0b11).unwrap(), 0.25 - 0.3 + 0.8, epsilon = 1e-15);
    }

    #[test]
    fn ksii_is_efficient_at_every_order() {
        let game = crate::game::LookupGame::random_centered(6, 13).unwrap();
        let total = game.evaluate(universe_mask(6));
        for k in 1..=6 {
            let ksii = exact_ksii(&game, k).unwrap();
            assert_abs_diff_eq!(ksii.sum(), total, epsilon = 1e-9);
        }
    }

    #[test]
    fn k_additive_approx_routes_agree_and_interpolate() {
        let game = crate::game::LookupGame::random_centered(5, 4).unwrap();
        let sii = exact_sii(&game, 2).unwrap();
        let ksii = aggregate_sii_to_ksii(&sii).unwrap();
        for t_mask in 0..32u64 {
            let via_sii = k_additive_approx(&sii, t_mask).unwrap();
            let via_ksii = k_additive_approx(&ksii, t_mask).unwrap();
            assert_abs_diff_eq!(via_sii, via_ksii, epsilon = 1e-10);
        }

        // Order n reproduces the centered game exactly.
        let full = exact_sii(&game, 5).unwrap();
        for t_mask in 0..32u64 {
            assert_abs_diff_eq!(
                k_additive_approx(&full, t_mask).unwrap(),
                game.evaluate(t_mask),
                epsilon = 1e-9
            );
        }

        // Order 1 is the additive Shapley-value game.
        let sv = exact_sv(&game).unwrap();
        let approx1 = k_additive_approx(&sv, 0b10110).unwrap();
        let direct: f64 = [0b00010u64, 0b00100, 0b10000]
            .iter()
            .map(|&m| sv.get(m).unwrap())
            .sum();
        assert_abs_diff_eq!(approx1, direct, epsilon = 1e-12);
    }

    #[test]
    fn aggregation_rejects_sparse_or_wrong_kind_input() {
        let game = crate::game::LookupGame::random_centered(4, 2).unwrap();
        let mut sii = exact_sii(&game, 2).unwrap();
        let ksii = aggregate_sii_to_ksii(&sii).unwrap();
        assert!(aggregate_sii_to_ksii(&ksii).is_err());

        sii = {
            let mut sparse = InteractionValues::new(4, 2, IndexKind::Sii).unwrap();
            sparse.set(0b0001, 1.0).unwrap();
            sparse
        };
        assert!(matches!(aggregate_sii_to_ksii(&sii), Err(Error::KeyMismatch { .. })));
    }

    #[test]
    fn guard_refuses_large_player_counts() {
        struct Big(usize);
        impl GameOracle for Big {
            fn n(&self) -> usize {
                self.0
            }
            fn evaluate(&self, mask: u64) -> f64 {
                mask.count_ones() as f64
            }
        }
        assert!(matches!(exact_sv(&Big(21)), Err(Error::ExactOracleGuard { .. })));
        assert!(matches!(moebius_transform(&Big(21)), Err(Error::ExactOracleGuard { .. })));
        // Forcing lifts the oracle guard but not the tabulation limit.
        assert!(exact_sii_forced(&Big(25), 1).is_err());
    }
}
