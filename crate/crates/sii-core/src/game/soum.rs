//! Sums of unanimity games (SOUMs).
//!
//! A SOUM is `ν(T) = Σ_m a_m · 1{R_m ⊆ T}` for interaction subsets `R_m`
//! with coefficients `a_m`. Its interaction indices have closed forms, which
//! makes SOUMs the ground-truth workhorse for benchmarking estimators at
//! player counts where brute-force enumeration is out of reach.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::GameOracle;
use crate::coalition::{universe_mask, Coalition, MAX_PLAYERS};
use crate::error::{Error, Result};
use crate::jsonio;
use crate::values::{IndexKind, InteractionValues};

/// One unanimity term: `a · 1{R ⊆ T}` with `R` encoded as a mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoumTerm {
    /// Interaction subset `R` (nonempty).
    pub mask: u64,
    /// Coefficient `a`.
    pub coefficient: f64,
}

/// A sum of unanimity games over `n` players.
pub struct SoumGame {
    n: usize,
    terms: Vec<SoumTerm>,
}

/// On-disk form: `{"n": ..., "terms": [{"subset": [...], "coefficient": ...}]}`
/// with 1-based ascending player lists.
#[derive(Serialize, Deserialize)]
struct SoumFile {
    n: usize,
    terms: Vec<SoumTermFile>,
}

#[derive(Serialize, Deserialize)]
struct SoumTermFile {
    subset: Vec<usize>,
    coefficient: f64,
}

impl SoumGame {
    /// Builds a SOUM from explicit terms.
    ///
    /// # Errors
    ///
    /// Returns an error if `n` is out of range, a term mask is empty or
    /// references players outside `{1, ..., n}`, or a coefficient is
    /// non-finite.
    pub fn new(n: usize, terms: Vec<SoumTerm>) -> Result<Self> {
        if n == 0 || n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
        }
        for term in &terms {
            if term.mask == 0 {
                return Err(Error::SoumInfeasible {
                    reason: "interaction subsets must be nonempty".into(),
                });
            }
            if term.mask & !universe_mask(n) != 0 {
                return Err(Error::MaskOutOfRange { mask: term.mask, n });
            }
            jsonio::ensure_finite(term.coefficient, "SOUM coefficient")?;
        }
        Ok(Self { n, terms })
    }

    /// The unanimity terms.
    pub fn terms(&self) -> &[SoumTerm] {
        &self.terms
    }

    /// Closed-form interaction indices up to order `k`.
    ///
    /// For a unanimity term on `R`, the index of `S` is
    /// `a / (|R| - |S| + 1)` when `S ⊆ R` and zero otherwise; terms sum.
    /// The result is dense over all subsets of sizes `1..=k`.
    ///
    /// # Errors
    ///
    /// Returns an error if `k` is zero or exceeds `n`.
    pub fn analytic_sii(&self, k: usize) -> Result<InteractionValues> {
        let mut values = InteractionValues::dense(self.n, k, IndexKind::Sii)?;
        for term in &self.terms {
            let r = term.mask.count_ones() as usize;
            // Walk every nonempty sub-subset of R, skipping those above order k.
            let mut sub = term.mask;
            loop {
                let s = sub.count_ones() as usize;
                if sub != 0 && s <= k {
                    values.add(sub, term.coefficient / (r - s + 1) as f64)?;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & term.mask;
            }
        }
        Ok(values)
    }
}

impl GameOracle for SoumGame {
    fn n(&self) -> usize {
        self.n
    }

    fn evaluate(&self, mask: u64) -> f64 {
        self.terms
            .iter()
            .filter(|term| term.mask & !mask == 0)
            .map(|term| term.coefficient)
            .sum()
    }
}

/// Generates a random SOUM: `n_dummy` players are excluded from every
/// interaction, term sizes are uniform on `{1, ..., max_size}`, subsets are
/// uniform among the non-dummy players, and coefficients are uniform on
/// `[0, 1)`. Fully reproducible from `seed`.
///
/// # Errors
///
/// Returns an error if the parameters are infeasible (`m_terms` or
/// `max_size` zero, `n_dummy >= n`, or `max_size` larger than the non-dummy
/// pool).
pub fn generate_soum(
    n: usize,
    m_terms: usize,
    max_size: usize,
    n_dummy: usize,
    seed: u64,
) -> Result<SoumGame> {
    if n == 0 || n > MAX_PLAYERS {
        return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
    }
    if m_terms == 0 {
        return Err(Error::SoumInfeasible { reason: "m_terms must be positive".into() });
    }
    if n_dummy >= n {
        return Err(Error::SoumInfeasible {
            reason: format!("n_dummy = {n_dummy} leaves no informative players out of n = {n}"),
        });
    }
    if max_size == 0 || max_size > n - n_dummy {
        return Err(Error::SoumInfeasible {
            reason: format!(
                "max_size = {max_size} must lie in 1..={} (non-dummy pool)",
                n - n_dummy
            ),
        });
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut dummies = rand::seq::index::sample(&mut rng, n, n_dummy).into_vec();
    dummies.sort_unstable();
    let dummy_mask: u64 = dummies.iter().map(|&i| 1u64 << i).fold(0, |acc, b| acc | b);
    let informative: Vec<usize> = (0..n).filter(|i| dummy_mask & (1 << i) == 0).collect();

    let mut terms = Vec::with_capacity(m_terms);
    for _ in 0..m_terms {
        let size = rng.random_range(1..=max_size);
        let picks = rand::seq::index::sample(&mut rng, informative.len(), size);
        let mask = picks.iter().map(|i| 1u64 << informative[i]).fold(0, |acc, b| acc | b);
        terms.push(SoumTerm { mask, coefficient: rng.random::<f64>() });
    }
    SoumGame::new(n, terms)
}

/// Reads a SOUM from a JSON file.
///
/// # Errors
///
/// Returns an error on I/O or parse failure, or if a term references an
/// invalid subset.
pub fn load_soum_game(path: &Path) -> Result<SoumGame> {
    let file: SoumFile = jsonio::read_json_file(path)?;
    if file.n == 0 || file.n > MAX_PLAYERS {
        return Err(Error::InvalidArtifact {
            what: "SOUM game",
            reason: format!("n = {} out of range", file.n),
        });
    }
    let mut terms = Vec::with_capacity(file.terms.len());
    for term in &file.terms {
        let coalition = Coalition::from_players(&term.subset, file.n)?;
        terms.push(SoumTerm { mask: coalition.mask(), coefficient: term.coefficient });
    }
    SoumGame::new(file.n, terms)
}

/// Serializes a SOUM to a JSON string with deterministic float formatting.
///
/// # Errors
///
/// Returns an error if serialization fails.
pub fn soum_game_to_json(game: &SoumGame) -> Result<String> {
    let terms = game
        .terms
        .iter()
        .map(|term| {
            let coalition = Coalition::new(term.mask, game.n).expect("terms validated");
            SoumTermFile { subset: coalition.players(), coefficient: term.coefficient }
        })
        .collect();
    let file = SoumFile { n: game.n, terms };
    jsonio::to_json_string(&file)
}

/// Writes a SOUM to a JSON file with deterministic float formatting.
///
/// # Errors
///
/// Returns an error if the file cannot be written.
pub fn store_soum_game(game: &SoumGame, path: &Path) -> Result<()> {
    let text = soum_game_to_json(game)?;
    std::fs::write(path, text).map_err(Error::from)
}
