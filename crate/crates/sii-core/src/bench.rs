//! Benchmark harness: estimation-quality metrics and the sweep driver.
//!
//! Quality is measured per interaction order against a ground-truth table:
//! [`mse`] (mean squared error, lower is better) and [`prec_at_10`]
//! (overlap of the ten highest-|value| interactions, higher is better).
//! [`run_benchmark`] sweeps methods × budgets × repetitions, produces one
//! [`BenchmarkRow`] per requested order, and serializes to CSV with
//! 17-significant-digit floats so re-reading reproduces bit-identical rows.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimation::{
    inconsistent_kernelshap_iq, kernelshap_iq, permutation_sampling_sii, shap_iq_sii,
    EstimatorConfig, Estimates,
};
use crate::game::GameOracle;
use crate::jsonio::format_f64;
use crate::sampling::SamplingWeights;
use crate::values::{IndexKind, InteractionValues};

/// The budgeted estimators the benchmark can sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Iterative WLS with the higher-order split.
    KernelShapIq,
    /// Single stacked WLS with order-1 kernel weights.
    Inconsistent,
    /// Permutation sampling of discrete derivatives.
    Permutation,
    /// Direct weighted sum with exact subset weights.
    ShapIq,
}

impl Method {
    /// All methods, in the canonical sweep order.
    pub const ALL: [Method; 4] =
        [Method::KernelShapIq, Method::Inconsistent, Method::Permutation, Method::ShapIq];

    /// The identifier used on the command line and in CSV rows.
    pub fn name(self) -> &'static str {
        match self {
            Method::KernelShapIq => "kernelshapiq",
            Method::Inconsistent => "inconsistent",
            Method::Permutation => "permutation",
            Method::ShapIq => "shapiq",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernelshapiq" => Ok(Method::KernelShapIq),
            "inconsistent" => Ok(Method::Inconsistent),
            "permutation" => Ok(Method::Permutation),
            "shapiq" => Ok(Method::ShapIq),
            other => Err(Error::InvalidConfig {
                reason: format!(
                    "unknown method '{other}' (expected kernelshapiq, inconsistent, \
                     permutation, or shapiq)"
                ),
            }),
        }
    }
}

/// Mean squared error between two value tables at one interaction order.
///
/// # Errors
///
/// Returns an error if the tables do not hold exactly the same coalitions
/// of that order.
pub fn mse(estimates: &InteractionValues, ground_truth: &InteractionValues, order: usize) -> Result<f64> {
    let mut count = 0usize;
    let mut total = 0.0;
    for (mask, truth) in ground_truth.entries_of_size(order) {
        let estimate = estimates.get(mask).ok_or(Error::KeyMismatch {
            order,
            reason: format!("estimates are missing coalition {mask:#b}"),
        })?;
        let diff = estimate - truth;
        total += diff * diff;
        count += 1;
    }
    if count == 0 || estimates.entries_of_size(order).len() != count {
        return Err(Error::KeyMismatch {
            order,
            reason: "tables hold different coalition sets at this order".into(),
        });
    }
    Ok(total / count as f64)
}

/// The coalitions of one order ranked by descending `|value|`, ties broken
/// by ascending mask, truncated to the top ten (or all, if fewer exist).
fn top_ten(values: &InteractionValues, order: usize) -> Vec<u64> {
    let mut ranked: Vec<(u64, f64)> = values.entries_of_size(order);
    ranked.sort_by(|a, b| {
        b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0))
    });
    ranked.truncate(10);
    ranked.into_iter().map(|(mask, _)| mask).collect()
}

/// Precision-at-ten: the fraction of the ten highest-|value| ground-truth
/// interactions of one order that also rank in the estimates' top ten.
/// When fewer than ten interactions exist, all of them are compared.
///
/// # Errors
///
/// Returns an error if the tables do not hold exactly the same coalitions
/// of that order.
pub fn prec_at_10(
    estimates: &InteractionValues,
    ground_truth: &InteractionValues,
    order: usize,
) -> Result<f64> {
    // Reuse the key-set check (the value itself is not needed).
    mse(estimates, ground_truth, order)?;
    let top_est = top_ten(estimates, order);
    let top_truth = top_ten(ground_truth, order);
    let hits = top_truth.iter().filter(|mask| top_est.contains(mask)).count();
    Ok(hits as f64 / top_truth.len() as f64)
}

/// One benchmark measurement: a method, budget, and repetition evaluated
/// at one interaction order.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BenchmarkRow {
    /// Estimator name (see [`Method::name`]).
    pub method: String,
    /// Interaction order the metrics were computed at.
    pub order: usize,
    /// Evaluation budget granted to the estimator.
    pub budget: u64,
    /// Seed of this repetition (`seed0 + run`).
    pub run_seed: u64,
    /// Mean squared error against the ground truth (NaN on failure).
    pub mse: f64,
    /// Precision-at-ten against the ground truth (NaN on failure).
    pub prec_at_10: f64,
    /// Estimator wall-clock time in milliseconds (ground truth excluded).
    pub runtime_ms: f64,
    /// `"ok"`, or `"failed"` when the estimator returned an error.
    pub status: String,
}

/// Header line of the benchmark CSV schema.
pub const BENCHMARK_CSV_HEADER: [&str; 8] =
    ["method", "order", "budget", "run_seed", "mse", "prec_at_10", "runtime_ms", "status"];

/// Renders benchmark rows as a CSV string with bit-exact float round-trips.
///
/// # Errors
///
/// Returns an error if serialization fails.
pub fn benchmark_csv_to_string(rows: &[BenchmarkRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(BENCHMARK_CSV_HEADER)
        .map_err(|e| Error::InvalidArtifact { what: "benchmark CSV", reason: e.to_string() })?;
    for row in rows {
        writer
            .write_record([
                row.method.clone(),
                row.order.to_string(),
                row.budget.to_string(),
                row.run_seed.to_string(),
                format_f64(row.mse),
                format_f64(row.prec_at_10),
                format_f64(row.runtime_ms),
                row.status.clone(),
            ])
            .map_err(|e| Error::InvalidArtifact { what: "benchmark CSV", reason: e.to_string() })?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidArtifact { what: "benchmark CSV", reason: e.to_string() })?;
    String::from_utf8(bytes)
        .map_err(|e| Error::InvalidArtifact { what: "benchmark CSV", reason: e.to_string() })
}

/// Writes benchmark rows as CSV with bit-exact float round-trips.
///
/// # Errors
///
/// Returns an error if the file cannot be written.
pub fn write_benchmark_csv(rows: &[BenchmarkRow], path: &Path) -> Result<()> {
    let text = benchmark_csv_to_string(rows)?;
    std::fs::write(path, text).map_err(Error::from)
}

/// Reads back a benchmark CSV written by [`write_benchmark_csv`].
///
/// # Errors
///
/// Returns an error on an unexpected header, malformed fields, or I/O
/// failure.
pub fn read_benchmark_csv(path: &Path) -> Result<Vec<BenchmarkRow>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::InvalidArtifact { what: "benchmark CSV", reason: e.to_string() })?;
    let header = reader
        .headers()
        .map_err(|e| Error::InvalidArtifact { what: "benchmark CSV", reason: e.to_string() })?;
    if header.iter().ne(BENCHMARK_CSV_HEADER) {
        return Err(Error::InvalidArtifact {
            what: "benchmark CSV",
            reason: format!("unexpected CSV header: {}", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let parse = |field: &str, name: &str| -> Result<f64> {
        field.parse::<f64>().map_err(|_| Error::InvalidArtifact {
            what: "benchmark CSV",
            reason: format!("field {name} is not a float: '{field}'"),
        })
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::InvalidArtifact { what: "benchmark CSV", reason: e.to_string() })?;
        if record.len() != 8 {
            return Err(Error::InvalidArtifact {
                what: "benchmark CSV",
                reason: format!("expected 8 CSV fields, found {}", record.len()),
            });
        }
        rows.push(BenchmarkRow {
            method: record[0].to_string(),
            order: record[1].parse().map_err(|_| Error::InvalidArtifact {
                what: "benchmark CSV",
                reason: format!("field order is not an integer: '{}'", &record[1]),
            })?,
            budget: record[2].parse().map_err(|_| Error::InvalidArtifact {
                what: "benchmark CSV",
                reason: format!("field budget is not an integer: '{}'", &record[2]),
            })?,
            run_seed: record[3].parse().map_err(|_| Error::InvalidArtifact {
                what: "benchmark CSV",
                reason: format!("field run_seed is not an integer: '{}'", &record[3]),
            })?,
            mse: parse(&record[4], "mse")?,
            prec_at_10: parse(&record[5], "prec_at_10")?,
            runtime_ms: parse(&record[6], "runtime_ms")?,
            status: record[7].to_string(),
        });
    }
    Ok(rows)
}

/// Sweep configuration for [`run_benchmark`].
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    /// Estimators to compare.
    pub methods: Vec<Method>,
    /// Interaction orders to score (the estimators run once at the
    /// largest).
    pub orders: Vec<usize>,
    /// Budget grid.
    pub budgets: Vec<u64>,
    /// Repetitions per (method, budget) cell.
    pub n_runs: usize,
    /// Base seed; repetition `r` uses `seed0 + r`.
    pub seed0: u64,
    /// Stand-in for the infinite kernel weight in the WLS estimators.
    pub mu_inf: f64,
}

fn run_estimator<G: GameOracle>(
    method: Method,
    game: &G,
    order: usize,
    budget: u64,
    seed: u64,
    mu_inf: f64,
) -> Result<Estimates> {
    match method {
        Method::KernelShapIq => {
            let config = EstimatorConfig { mu_inf, ..EstimatorConfig::new(order, budget, seed) };
            kernelshap_iq(game, &config)
        }
        Method::Inconsistent => {
            let config = EstimatorConfig { mu_inf, ..EstimatorConfig::new(order, budget, seed) };
            inconsistent_kernelshap_iq(game, &config)
        }
        Method::Permutation => permutation_sampling_sii(game, order, budget, seed),
        Method::ShapIq => {
            shap_iq_sii(game, order, budget, &SamplingWeights::default_for(game.n()), seed)
        }
    }
}

/// Runs the benchmark sweep: every method × budget × repetition invokes the
/// estimator once at the largest requested order, then scores the result at
/// each requested order against `ground_truth` (computed once by the
/// caller, excluded from the timed section). k-Shapley ground truth scores
/// the aggregated estimates; any other kind scores the raw SII estimates.
/// A failing estimator yields rows with `status = "failed"` and NaN metrics
/// instead of aborting the sweep.
///
/// # Errors
///
/// Returns an error if the configuration is empty or inconsistent with the
/// game and ground truth.
pub fn run_benchmark<G: GameOracle>(
    game: &G,
    ground_truth: &InteractionValues,
    config: &BenchmarkConfig,
) -> Result<Vec<BenchmarkRow>> {
    let n = game.n();
    if config.methods.is_empty() || config.orders.is_empty() || config.budgets.is_empty() {
        return Err(Error::InvalidConfig {
            reason: "benchmark needs at least one method, order, and budget".into(),
        });
    }
    if config.n_runs == 0 {
        return Err(Error::InvalidConfig { reason: "benchmark needs at least one run".into() });
    }
    if ground_truth.n() != n {
        return Err(Error::InvalidConfig {
            reason: format!(
                "ground truth is for {} players but the game has {n}",
                ground_truth.n()
            ),
        });
    }
    let k_max = *config.orders.iter().max().expect("orders not empty");
    for &order in &config.orders {
        if order == 0 || order > n || order > ground_truth.order() {
            return Err(Error::OrderOutOfRange { order, n: n.min(ground_truth.order()) });
        }
    }

    let mut rows = Vec::new();
    for &method in &config.methods {
        for &budget in &config.budgets {
            for run in 0..config.n_runs {
                let seed = config.seed0.wrapping_add(run as u64);
                let started = Instant::now();
                let outcome = run_estimator(method, game, k_max, budget, seed, config.mu_inf);
                let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
                match &outcome {
                    Ok(estimates) => {
                        let scored = if ground_truth.kind() == IndexKind::KSii {
                            &estimates.ksii
                        } else {
                            &estimates.sii
                        };
                        for &order in &config.orders {
                            rows.push(BenchmarkRow {
                                method: method.name().to_string(),
                                order,
                                budget,
                                run_seed: seed,
                                mse: mse(scored, ground_truth, order)?,
                                prec_at_10: prec_at_10(scored, ground_truth, order)?,
                                runtime_ms,
                                status: "ok".to_string(),
                            });
                        }
                    }
                    Err(error) => {
                        eprintln!(
                            "warning: {method} failed at budget {budget}, seed {seed}: {error}"
                        );
                        for &order in &config.orders {
                            rows.push(BenchmarkRow {
                                method: method.name().to_string(),
                                order,
                                budget,
                                run_seed: seed,
                                mse: f64::NAN,
                                prec_at_10: f64::NAN,
                                runtime_ms,
                                status: "failed".to_string(),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}
