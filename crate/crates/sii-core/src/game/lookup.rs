//! Lookup-table games: all `2^n` coalition values held in memory.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::GameOracle;
use crate::coalition::MAX_PLAYERS;
use crate::error::{Error, Result};
use crate::jsonio;

/// Largest `n` for which a value table is tabulated from another oracle
/// (`2^24` doubles = 128 MiB).
pub const TABULATION_GUARD_N: usize = 24;

/// A game stored as a dense table of all `2^n` values, indexed by mask.
pub struct LookupGame {
    n: usize,
    values: Vec<f64>,
}

/// On-disk form: `{"n": ..., "values": [...]}` with `values[mask]` ordering.
#[derive(Serialize, Deserialize)]
struct LookupFile {
    n: usize,
    values: Vec<f64>,
}

impl LookupGame {
    /// Builds a lookup game from a dense value table (`values[mask]`).
    ///
    /// # Errors
    ///
    /// Returns an error if `n` exceeds [`TABULATION_GUARD_N`], the table
    /// length is not `2^n`, or any value is non-finite.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > TABULATION_GUARD_N {
            return Err(Error::TooManyPlayers { n, max: TABULATION_GUARD_N });
        }
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(Error::LookupLengthMismatch { n, got: values.len(), expected });
        }
        for &v in &values {
            jsonio::ensure_finite(v, "lookup game value")?;
        }
        Ok(Self { n, values })
    }

    /// Tabulates every coalition of `game` into a lookup table.
    ///
    /// # Errors
    ///
    /// Returns an error if `game.n()` exceeds [`TABULATION_GUARD_N`] or a
    /// value is non-finite.
    pub fn from_game<G: GameOracle>(game: &G) -> Result<Self> {
        let n = game.n();
        if n > TABULATION_GUARD_N {
            return Err(Error::TooManyPlayers { n, max: TABULATION_GUARD_N });
        }
        let values = (0..1u64 << n).map(|mask| game.evaluate(mask)).collect();
        Self::new(n, values)
    }

    /// Generates a centered game with values drawn uniformly from `[-1, 1)`
    /// and `ν(∅) = 0`, reproducible from `seed`.
    ///
    /// # Errors
    ///
    /// Returns an error if `n` is zero or exceeds [`TABULATION_GUARD_N`].
    pub fn random_centered(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooManyPlayers { n, max: TABULATION_GUARD_N });
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut values: Vec<f64> =
            (0..1u64 << n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        values[0] = 0.0;
        Self::new(n, values)
    }

    /// The raw value table, indexed by mask.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl GameOracle for LookupGame {
    fn n(&self) -> usize {
        self.n
    }

    fn evaluate(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }
}

/// Reads a lookup game from a JSON file (`{"n": ..., "values": [...]}`).
///
/// # Errors
///
/// Returns an error on I/O or parse failure, or if the table is invalid
/// (wrong length, non-finite entries, `n` out of range).
pub fn load_lookup_game(path: &Path) -> Result<LookupGame> {
    let file: LookupFile = jsonio::read_json_file(path)?;
    if file.n == 0 || file.n > MAX_PLAYERS {
        return Err(Error::InvalidArtifact {
            what: "lookup game",
            reason: format!("n = {} out of range", file.n),
        });
    }
    LookupGame::new(file.n, file.values)
}

/// Serializes a lookup game to a JSON string with deterministic float
/// formatting.
///
/// # Errors
///
/// Returns an error if serialization fails.
pub fn lookup_game_to_json(game: &LookupGame) -> Result<String> {
    let file = LookupFile { n: game.n, values: game.values.clone() };
    jsonio::to_json_string(&file)
}

/// Writes a lookup game to a JSON file with deterministic float formatting.
///
/// # Errors
///
/// Returns an error if the file cannot be written.
pub fn store_lookup_game(game: &LookupGame, path: &Path) -> Result<()> {
    let text = lookup_game_to_json(game)?;
    std::fs::write(path, text).map_err(Error::from)
}
