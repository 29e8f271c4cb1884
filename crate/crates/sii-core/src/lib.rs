//! Shapley interaction indices for cooperative games.
//!
//! This crate computes and approximates Shapley interaction indices (SII)
//! and k-Shapley values for set functions `ν: 2^N -> ℝ` with up to 64
//! players:
//!
//! * exact brute-force oracles for small player counts ([`exact`]),
//! * weighted-least-squares estimators that fit a k-additive surrogate game
//!   on a sampled batch of coalitions ([`estimation`]),
//! * sampling baselines (permutation sampling and a direct weighted-sum
//!   estimator) for comparison,
//! * benchmark metrics and numerical validators for the closed-form
//!   structure of the weighted-least-squares solutions ([`bench`],
//!   [`conjectures`]).
//!
//! Coalitions are `u64` bitmasks: bit `i - 1` set ⇔ player `i` (1-based)
//! is a member. Games are mean-centered (`ν(∅) = 0`) before any index is
//! computed; wrappers in [`game`] handle centering and budget accounting.

pub mod bench;
pub mod bernoulli;
pub mod coalition;
pub mod conjectures;
pub mod error;
pub mod estimation;
pub mod exact;
pub mod game;
pub mod jsonio;
pub mod sampling;
pub mod values;
pub mod weights;
pub mod wls;

pub use bench::{
    benchmark_csv_to_string, mse, prec_at_10, read_benchmark_csv, run_benchmark,
    write_benchmark_csv, BenchmarkConfig, BenchmarkRow, Method, BENCHMARK_CSV_HEADER,
};
pub use bernoulli::BernoulliTable;
pub use coalition::{binomial, enumerate_subsets, submasks, universe_mask, Coalition, MAX_PLAYERS};
pub use conjectures::{
    conjectured_precision_matrix, validate_conjecture_inverse, validate_conjecture_sii,
    ConjectureCase, ConjectureReport, CONJECTURE_MSE_TOLERANCE, CONJECTURE_MU_INF,
};
pub use error::{Error, Result};
pub use estimation::{
    inconsistent_kernelshap_iq, kernelshap_iq, permutation_sampling_sii, shap_iq_sii,
    sii_subset_weight, EstimatorConfig, Estimates,
};
pub use exact::{
    aggregate_sii_to_ksii, discrete_derivative, exact_ksii, exact_sii, exact_sv,
    k_additive_approx, moebius_transform, pairwise_sum,
};
pub use game::{
    generate_soum, load_lookup_game, load_soum_game, lookup_game_to_json, soum_game_to_json,
    store_lookup_game, store_soum_game, CenteredGame, CountingGame, GameOracle, LookupGame,
    SoumGame, SoumTerm,
};
pub use sampling::{compute_sampling_order, sample_batch, SamplingBatch, SamplingWeights};
pub use values::{IndexKind, InteractionValues, RunMetadata};
pub use weights::{kernel_weight_mu, LambdaWeights};
pub use wls::{
    build_design_matrix, interaction_columns, solve_weighted_least_squares, WlsRow, WlsSystem,
};
