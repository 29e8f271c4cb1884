//! End-to-end acceptance checks for the whole stack: exact oracles,
//! regression and sampling estimators, the closed-form-limit validators,
//! the benchmark harness, and the command-line binary. Every test prints a
//! single PASS/FAIL line naming the property, the measured value, and the
//! pinned tolerance (visible with `--nocapture`; the assertion carries the
//! same message on failure).

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use sii_core::{
    exact_ksii, exact_sii, exact_sv, generate_soum, inconsistent_kernelshap_iq, k_additive_approx,
    kernelshap_iq, permutation_sampling_sii, run_benchmark, shap_iq_sii, universe_mask,
    validate_conjecture_inverse, validate_conjecture_sii, BenchmarkConfig, EstimatorConfig,
    GameOracle, InteractionValues, LookupGame, Method, SamplingWeights, SoumGame, SoumTerm,
    CONJECTURE_MSE_TOLERANCE, CONJECTURE_MU_INF,
};

/// Prints the per-criterion verdict line and fails the test on FAIL.
fn check(name: &str, ok: bool, detail: &str) {
    println!("{}  {name} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

/// A random game tabulated on all coalitions, values uniform in [-1, 1],
/// centered so the empty coalition is worth zero.
fn random_lookup(n: usize, seed: u64) -> LookupGame {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..1u64 << n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
    values[0] = 0.0;
    LookupGame::new(n, values).unwrap()
}

/// The 20 tabulated games shared by the full-budget exactness and
/// efficiency checks: five seeds for each player count.
fn lookup_suite() -> Vec<LookupGame> {
    let mut games = Vec::with_capacity(20);
    for n in [4usize, 6, 8, 10] {
        for seed in 1..=5u64 {
            games.push(random_lookup(n, 1000 * n as u64 + seed));
        }
    }
    games
}

/// Largest absolute difference on the order-`size` coordinates.
fn max_abs_gap_at(est: &InteractionValues, truth: &InteractionValues, size: u32) -> f64 {
    truth
        .iter()
        .filter(|(mask, _)| mask.count_ones() == size)
        .map(|(mask, value)| (est.get(mask).unwrap() - value).abs())
        .fold(0.0, f64::max)
}

#[test]
fn full_budget_order_one_matches_exact_shapley_values() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for game in &lookup_suite() {
        let n = game.n();
        let truth = exact_sv(game).unwrap();
        let est = kernelshap_iq(game, &EstimatorConfig::new(1, 1 << n, 0)).unwrap();
        worst = worst.max(est.sii.max_abs_diff(&truth).unwrap());
    }
    let elapsed = start.elapsed();
    check(
        "full-budget order-1 regression equals the exact Shapley values",
        worst <= 1e-5 && elapsed < Duration::from_secs(10),
        &format!("max |gap| {worst:.3e} <= 1e-5 over 20 games, {elapsed:.2?} < 10s"),
    );
}

#[test]
fn full_budget_pairwise_estimates_match_exact_interaction_indices() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for game in &lookup_suite() {
        let n = game.n();
        let truth = exact_sii(game, 2).unwrap();
        let est = kernelshap_iq(game, &EstimatorConfig::new(2, 1 << n, 0)).unwrap();
        worst = worst.max(max_abs_gap_at(&est.sii, &truth, 2));
    }
    let elapsed = start.elapsed();
    check(
        "full-budget pairwise regression equals the exact interaction index",
        worst <= 1e-5 && elapsed < Duration::from_secs(30),
        &format!("max |gap| {worst:.3e} <= 1e-5 over 20 games, {elapsed:.2?} < 30s"),
    );
}

#[test]
fn precision_matrix_closed_form_holds_on_the_grid() {
    let start = Instant::now();
    let report = validate_conjecture_inverse(2, 11, CONJECTURE_MU_INF).unwrap();
    let elapsed = start.elapsed();
    check(
        "numerical precision matrices match the closed form on the n=2..11 grid",
        report.pass && elapsed < Duration::from_secs(120),
        &format!(
            "max MSE {:.3e} < {CONJECTURE_MSE_TOLERANCE:.0e} over {} grid points, {elapsed:.2?} < 2min",
            report.max_mse,
            report.cases.len()
        ),
    );
}

#[test]
fn split_limit_construction_recovers_exact_indices_on_random_soums() {
    let start = Instant::now();
    let report = validate_conjecture_sii(2, 11, 10, 1000, 0).unwrap();
    let elapsed = start.elapsed();
    check(
        "split closed-form/regression-limit construction matches exact indices",
        report.pass && elapsed < Duration::from_secs(600),
        &format!(
            "max avg MSE {:.3e} < {CONJECTURE_MSE_TOLERANCE:.0e} over {} grid points, {elapsed:.2?} < 10min",
            report.max_mse,
            report.cases.len()
        ),
    );
}

#[test]
fn full_budget_aggregates_satisfy_efficiency() {
    // The regression estimators enforce the grand-coalition constraint with
    // a large-but-finite weight whose slack scales as 1/mu_inf, so these
    // full-budget runs use 1e11 to test the structural identity rather than
    // the default weight's rounding level.
    let mu_inf = 1e11;
    let mut worst = 0.0f64;
    for game in &lookup_suite() {
        let n = game.n();
        let nu_n = game.evaluate(universe_mask(n)) - game.evaluate(0);
        let exact: f64 = exact_ksii(game, 2).unwrap().iter().map(|(_, v)| v).sum();
        worst = worst.max((exact - nu_n).abs());
        for est in [
            kernelshap_iq(game, &EstimatorConfig { mu_inf, ..EstimatorConfig::new(2, 1 << n, 0) })
                .unwrap(),
            inconsistent_kernelshap_iq(
                game,
                &EstimatorConfig { mu_inf, ..EstimatorConfig::new(2, 1 << n, 0) },
            )
            .unwrap(),
        ] {
            let total: f64 = est.ksii.iter().map(|(_, v)| v).sum();
            worst = worst.max((total - nu_n).abs());
        }
    }
    // One higher-order case: the aggregation identity is order-independent.
    let soum = generate_soum(10, 30, 4, 1, 5).unwrap();
    let nu_n = soum.evaluate(universe_mask(10));
    let est =
        kernelshap_iq(&soum, &EstimatorConfig { mu_inf, ..EstimatorConfig::new(3, 1 << 10, 0) })
            .unwrap();
    let total: f64 = est.ksii.iter().map(|(_, v)| v).sum();
    worst = worst.max((total - nu_n).abs());
    check(
        "full-budget aggregated values sum to the grand-coalition value",
        worst <= 1e-8,
        &format!("max |sum - value(N)| {worst:.3e} <= 1e-8 over 20 games x 3 routes + order-3 case"),
    );
}

#[test]
fn brute_force_and_closed_form_oracles_agree_on_random_soums() {
    let mut worst = 0.0f64;
    for i in 0..20usize {
        let n = 4 + i % 7;
        let dummy = i % 2;
        let game = generate_soum(n, 20 + i, (n - dummy).min(4), dummy, 100 + i as u64).unwrap();
        let k = n.min(4);
        let analytic = game.analytic_sii(k).unwrap();
        let brute = exact_sii(&game, k).unwrap();
        worst = worst.max(analytic.max_abs_diff(&brute).unwrap());
    }
    check(
        "brute-force enumeration matches the closed-form unanimity-sum oracle",
        worst <= 1e-10,
        &format!("max |gap| {worst:.3e} <= 1e-10 over 20 games, n <= 10, order <= 4"),
    );
}

#[test]
fn full_order_surrogate_reproduces_every_coalition_value() {
    let mut worst = 0.0f64;
    for n in 4..=8usize {
        for seed in [1u64, 2] {
            let game = random_lookup(n, 7000 + 10 * n as u64 + seed);
            let table = exact_sii(&game, n).unwrap();
            for mask in 0..1u64 << n {
                let surrogate = k_additive_approx(&table, mask).unwrap();
                worst = worst.max((surrogate - game.evaluate(mask)).abs());
            }
        }
    }
    check(
        "the order-n surrogate game reproduces every coalition value",
        worst <= 1e-9,
        &format!("max |gap| {worst:.3e} <= 1e-9 over 10 games, all coalitions"),
    );
}

#[test]
fn stacked_full_order_regression_recovers_shapley_values() {
    let mut worst = 0.0f64;
    for n in 4..=8usize {
        let game = random_lookup(n, 40 + n as u64);
        let truth = exact_sv(&game).unwrap();
        let est = inconsistent_kernelshap_iq(&game, &EstimatorConfig::new(n, 1 << n, 0)).unwrap();
        worst = worst.max(max_abs_gap_at(&est.sii, &truth, 1));
    }
    check(
        "stacked order-n regression at full budget recovers the Shapley values",
        worst <= 1e-6,
        &format!("max |gap| {worst:.3e} <= 1e-6 for n = 4..8"),
    );
}

/// Worst standardized deviation of per-key seed means from the closed-form
/// values: `|mean - truth| / (standard error + 1e-12)`.
fn worst_standardized_gap(runs: &[HashMap<u64, f64>], truth: &InteractionValues) -> f64 {
    let n_seeds = runs.len() as f64;
    let mut worst = 0.0f64;
    for (mask, value) in truth.iter() {
        let samples: Vec<f64> = runs.iter().map(|r| r[&mask]).collect();
        let mean = samples.iter().sum::<f64>() / n_seeds;
        let var =
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_seeds - 1.0);
        let se = (var / n_seeds).sqrt();
        worst = worst.max((mean - value).abs() / (se + 1e-12));
    }
    worst
}

#[test]
fn sampling_baselines_concentrate_on_closed_form_indices() {
    let n = 10usize;
    let budget = 1u64 << (n - 2);
    let game = generate_soum(n, 30, 4, 0, 2).unwrap();
    let truth = game.analytic_sii(2).unwrap();
    let weights = SamplingWeights::default_for(n);
    let seeds = 10_000..10_500u64;

    let permutation: Vec<HashMap<u64, f64>> = seeds
        .clone()
        .map(|s| permutation_sampling_sii(&game, 2, budget, s).unwrap().sii.iter().collect())
        .collect();
    let z_permutation = worst_standardized_gap(&permutation, &truth);

    let direct: Vec<HashMap<u64, f64>> = seeds
        .map(|s| shap_iq_sii(&game, 2, budget, &weights, s).unwrap().sii.iter().collect())
        .collect();
    let z_direct = worst_standardized_gap(&direct, &truth);

    check(
        "sampling-baseline means lie within three standard errors of the oracle",
        z_permutation < 3.0 && z_direct < 3.0,
        &format!(
            "worst |z| permutation {z_permutation:.2}, direct weighted sum {z_direct:.2}, \
             both < 3 over 500 seeds at budget 2^8, all orders <= 2"
        ),
    );
}

/// A zero-mean benchmark game: 50 unanimity terms over 18 informative
/// players (two dummies), subsets drawn uniformly from all coalitions of
/// size <= 4 (so sizes concentrate on 3-4), coefficients uniform in [-1, 1].
fn zero_mean_benchmark_soum(seed: u64) -> SoumGame {
    let n = 20usize;
    let informative = 18usize;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let counts: Vec<f64> = (1..=4usize)
        .map(|s| (0..s).map(|i| (informative - i) as f64 / (i + 1) as f64).product())
        .collect();
    let total: f64 = counts.iter().sum();
    let mut terms = Vec::with_capacity(50);
    for _ in 0..50 {
        let mut u = rng.random::<f64>() * total;
        let mut size = 4usize;
        for (i, &count) in counts.iter().enumerate() {
            if u < count {
                size = i + 1;
                break;
            }
            u -= count;
        }
        let picks = rand::seq::index::sample(&mut rng, informative, size);
        let mask = picks.iter().map(|i| 1u64 << i).fold(0u64, |acc, bit| acc | bit);
        terms.push(SoumTerm { mask, coefficient: 2.0 * rng.random::<f64>() - 1.0 });
    }
    SoumGame::new(n, terms).unwrap()
}

#[test]
fn regression_estimators_dominate_permutation_on_median_error() {
    let start = Instant::now();
    let game = zero_mean_benchmark_soum(13);
    let truth = game.analytic_sii(2).unwrap();
    let config = BenchmarkConfig {
        methods: vec![Method::KernelShapIq, Method::Inconsistent, Method::Permutation],
        orders: vec![2],
        budgets: vec![1000, 2500, 5000],
        n_runs: 20,
        seed0: 0,
        mu_inf: 1e6,
    };
    let rows = run_benchmark(&game, &truth, &config).unwrap();
    let median = |budget: u64, method: &str| -> f64 {
        let mut mses: Vec<f64> = rows
            .iter()
            .filter(|r| r.budget == budget && r.method == method)
            .map(|r| r.mse)
            .collect();
        mses.sort_by(|a, b| a.total_cmp(b));
        mses[mses.len() / 2]
    };
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    for &budget in &config.budgets {
        let permutation = median(budget, "permutation");
        for method in ["kernelshapiq", "inconsistent"] {
            let ratio = median(budget, method) / permutation;
            worst_ratio = worst_ratio.max(ratio);
            ok &= ratio < 1.0;
        }
    }
    let elapsed = start.elapsed();
    check(
        "both regression estimators beat permutation sampling at every budget",
        ok && elapsed < Duration::from_secs(900),
        &format!(
            "worst median-MSE ratio vs permutation {worst_ratio:.2} < 1 across budgets \
             {{1000, 2500, 5000}} x 20 runs on an n=20 game, {elapsed:.2?} < 15min"
        ),
    );
}

fn sii_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sii")).args(args).output().expect("binary runs")
}

fn run_to_file(args: &[&str], out: &Path) -> Vec<u8> {
    let out_str = out.to_str().unwrap();
    let mut full: Vec<&str> = args.to_vec();
    full.extend_from_slice(&["--out", out_str]);
    let output = sii_cli(&full);
    assert!(
        output.status.success(),
        "`sii {}` failed: {}",
        full.join(" "),
        String::from_utf8_lossy(&output.stderr)
    );
    std::fs::read(out).unwrap()
}

/// Drops the wall-clock column from benchmark CSV bytes so reruns can be
/// compared bit-for-bit on everything the seed determines.
fn mask_runtime_column(csv: &[u8]) -> String {
    let text = String::from_utf8(csv.to_vec()).unwrap();
    text.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            fields
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != 6)
                .map(|(_, f)| *f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn cli_reruns_emit_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let soum_path = dir.path().join("game.soum.json");
    let lookup_path = dir.path().join("game.lookup.json");
    run_to_file(&["gen-soum", "--soum", "n=9,M=12,max=3,dummy=1", "--seed", "6"], &soum_path);
    run_to_file(&["precompute", "--soum", soum_path.to_str().unwrap()], &lookup_path);

    let lookup = lookup_path.to_str().unwrap();
    let invocations: Vec<Vec<&str>> = vec![
        vec!["gen-soum", "--soum", "n=9,M=12,max=3,dummy=1", "--seed", "6"],
        vec!["precompute", "--soum", soum_path.to_str().unwrap()],
        vec!["exact", "--game", lookup, "--order", "2", "--index", "ksii"],
        vec!["exact", "--soum", "n=12,M=25,max=4,dummy=2", "--game-seed", "3", "--order", "2"],
        vec![
            "estimate", "--game", lookup, "--method", "kernelshapiq", "--order", "2", "--budget",
            "200", "--seed", "11",
        ],
        vec![
            "estimate", "--game", lookup, "--method", "inconsistent", "--order", "2", "--budget",
            "200", "--seed", "11",
        ],
        vec![
            "estimate", "--game", lookup, "--method", "permutation", "--order", "2", "--budget",
            "200", "--seed", "11",
        ],
        vec![
            "estimate", "--game", lookup, "--method", "shapiq", "--order", "2", "--budget", "200",
            "--seed", "11", "--format", "csv",
        ],
        vec![
            "benchmark", "--soum", "n=10,M=20,max=3,dummy=1", "--game-seed", "3", "--methods",
            "kernelshapiq,inconsistent,permutation,shapiq", "--orders", "1,2", "--budgets",
            "128,256", "--runs", "3", "--seed", "2",
        ],
        vec!["validate-conjectures", "--conjecture", "inverse", "--n-min", "2", "--n-max", "6"],
        vec![
            "validate-conjectures", "--conjecture", "sii", "--n-min", "2", "--n-max", "6",
            "--soums", "3", "--terms", "50", "--seed", "1",
        ],
    ];

    let mut compared = 0usize;
    for (i, args) in invocations.iter().enumerate() {
        let first = run_to_file(args, &dir.path().join(format!("{i}.a")));
        let second = run_to_file(args, &dir.path().join(format!("{i}.b")));
        if args[0] == "benchmark" {
            // Byte-identical apart from the measured wall-clock column.
            assert_eq!(
                mask_runtime_column(&first),
                mask_runtime_column(&second),
                "benchmark rerun diverged beyond the runtime column: {args:?}"
            );
        } else {
            assert_eq!(first, second, "rerun produced different bytes: {args:?}");
        }
        compared += 1;
    }
    check(
        "repeated invocations with identical flags and seed reproduce output bytes",
        compared == invocations.len(),
        &format!(
            "{compared} subcommand invocations compared, benchmark CSV matched with \
             the wall-clock column masked"
        ),
    );
}
