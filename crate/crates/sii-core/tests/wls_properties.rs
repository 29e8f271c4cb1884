//! Randomized algebraic properties of the weighted least-squares solver:
//! weight additivity under row duplication and linearity in the responses.

use nalgebra::DMatrix;
use proptest::prelude::*;

use sii_core::solve_weighted_least_squares;

/// Smallest singular value of `√W · X`; properties are only meaningful on
/// systems that are not numerically rank-deficient.
fn smallest_scaled_singular_value(x: &DMatrix<f64>, weights: &[f64]) -> f64 {
    let mut scaled = x.clone();
    for (i, w) in weights.iter().enumerate() {
        for j in 0..scaled.ncols() {
            scaled[(i, j)] *= w.sqrt();
        }
    }
    scaled
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn system_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (3usize..=8, 1usize..=3).prop_flat_map(|(rows, cols)| {
        let entries = proptest::collection::vec(-2.0f64..2.0, rows * cols);
        let weights = proptest::collection::vec(0.1f64..4.0, rows);
        let responses = proptest::collection::vec(-5.0f64..5.0, rows);
        (Just(rows), Just(cols), entries, weights, responses)
    })
}

proptest! {
    #[test]
    fn splitting_a_row_weight_preserves_the_solution(
        (rows, cols, entries, weights, responses) in system_strategy(),
    ) {
        let x = DMatrix::from_row_slice(rows, cols, &entries);
        prop_assume!(smallest_scaled_singular_value(&x, &weights) > 1e-3);

        let base = solve_weighted_least_squares(&x, &weights, &responses).unwrap();

        // Append a copy of the last row and split its weight in half.
        let mut doubled = x.clone().insert_row(rows, 0.0);
        for j in 0..cols {
            doubled[(rows, j)] = x[(rows - 1, j)];
        }
        let mut split_weights = weights.clone();
        split_weights[rows - 1] /= 2.0;
        split_weights.push(weights[rows - 1] / 2.0);
        let mut split_responses = responses.clone();
        split_responses.push(responses[rows - 1]);

        let split = solve_weighted_least_squares(&doubled, &split_weights, &split_responses)
            .unwrap();
        for (a, b) in base.iter().zip(&split) {
            prop_assert!(
                (a - b).abs() <= 1e-6 * (1.0 + a.abs()),
                "coefficient {a} changed to {b} after splitting a duplicate row"
            );
        }
    }

    #[test]
    fn scaling_responses_scales_the_solution(
        (rows, cols, entries, weights, responses) in system_strategy(),
        scale in prop_oneof![0.1f64..10.0, -10.0f64..-0.1],
    ) {
        let x = DMatrix::from_row_slice(rows, cols, &entries);
        prop_assume!(smallest_scaled_singular_value(&x, &weights) > 1e-3);

        let base = solve_weighted_least_squares(&x, &weights, &responses).unwrap();
        let scaled_responses: Vec<f64> = responses.iter().map(|y| scale * y).collect();
        let scaled = solve_weighted_least_squares(&x, &weights, &scaled_responses).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!(
                (scale * a - b).abs() <= 1e-8 * (1.0 + (scale * a).abs()),
                "coefficient {a} scaled to {b}, expected {}",
                scale * a
            );
        }
    }
}
