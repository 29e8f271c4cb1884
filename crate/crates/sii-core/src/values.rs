//! Containers for interaction-index results and their JSON schema.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coalition::{enumerate_subsets, universe_mask, Coalition, MAX_PLAYERS};
use crate::error::{Error, Result};
use crate::jsonio;

/// Which interaction index a value set represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexKind {
    /// Shapley interaction index.
    #[serde(rename = "SII")]
    Sii,
    /// k-Shapley values (aggregated, efficient up to order `k`).
    #[serde(rename = "kSII")]
    KSii,
    /// Möbius transform (harsanyi dividends).
    #[serde(rename = "Moebius")]
    Moebius,
}

impl std::fmt::Display for IndexKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            IndexKind::Sii => "SII",
            IndexKind::KSii => "kSII",
            IndexKind::Moebius => "Moebius",
        };
        f.write_str(name)
    }
}

/// Provenance of an estimated value set, echoed into exported JSON so runs
/// can be reproduced from the artifact alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    /// Estimator name (e.g. `kernelshapiq`).
    pub method: String,
    /// Evaluation budget granted (distinct coalitions).
    pub budget: usize,
    /// RNG seed.
    pub seed: u64,
    /// Large-weight stand-in for infinite kernel weights.
    pub mu_inf: f64,
    /// Coalition sizes `< q0` (and `> n - q0`) were enumerated exactly.
    pub q0: usize,
    /// Monte Carlo draws spent on the sampled sizes.
    pub n_samples: usize,
}

/// A set of interaction values: one `f64` per coalition of size `1..=order`,
/// keyed by mask.
///
/// Iteration and JSON export order entries by `(size, mask)` ascending, so
/// identical inputs always produce identical artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionValues {
    n: usize,
    order: usize,
    kind: IndexKind,
    entries: BTreeMap<u64, f64>,
}

/// On-disk form of [`InteractionValues`].
#[derive(Serialize, Deserialize)]
struct ValuesFile {
    n: usize,
    order: usize,
    index: IndexKind,
    entries: Vec<EntryFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<RunMetadata>,
}

#[derive(Serialize, Deserialize)]
struct EntryFile {
    subset: Vec<usize>,
    value: f64,
}

impl InteractionValues {
    /// Creates an empty container for coalitions of size `1..=order`.
    ///
    /// # Errors
    ///
    /// Returns an error if `n` or `order` is out of range.
    pub fn new(n: usize, order: usize, kind: IndexKind) -> Result<Self> {
        if n == 0 || n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
        }
        if order == 0 || order > n {
            return Err(Error::OrderOutOfRange { order, n });
        }
        Ok(Self { n, order, kind, entries: BTreeMap::new() })
    }

    /// Creates a container holding an explicit zero for every coalition of
    /// size `1..=order`.
    ///
    /// # Errors
    ///
    /// Returns an error if the parameters are out of range or the dense key
    /// set would be unreasonably large.
    pub fn dense(n: usize, order: usize, kind: IndexKind) -> Result<Self> {
        let mut values = Self::new(n, order, kind)?;
        for mask in enumerate_subsets(n, Some((1, order)))? {
            values.entries.insert(mask, 0.0);
        }
        Ok(values)
    }

    /// Number of players.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Maximum interaction size.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Which index the values represent.
    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    fn check_key(&self, mask: u64) -> Result<()> {
        if mask == 0 || mask & !universe_mask(self.n) != 0 {
            return Err(Error::MaskOutOfRange { mask, n: self.n });
        }
        let size = mask.count_ones() as usize;
        if size > self.order {
            return Err(Error::OrderOutOfRange { order: size, n: self.order });
        }
        Ok(())
    }

    /// Sets the value for a coalition.
    ///
    /// # Errors
    ///
    /// Returns an error if the mask is empty, out of range, or larger than
    /// `order`.
    pub fn set(&mut self, mask: u64, value: f64) -> Result<()> {
        self.check_key(mask)?;
        self.entries.insert(mask, value);
        Ok(())
    }

    /// Adds `value` to a coalition's entry (treating a missing entry as 0).
    ///
    /// # Errors
    ///
    /// Same conditions as [`InteractionValues::set`].
    pub fn add(&mut self, mask: u64, value: f64) -> Result<()> {
        self.check_key(mask)?;
        *self.entries.entry(mask).or_insert(0.0) += value;
        Ok(())
    }

    /// Value for a coalition, if present.
    pub fn get(&self, mask: u64) -> Option<f64> {
        self.entries.get(&mask).copied()
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether no entries are stored.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in `(size, mask)` ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        let mut keys: Vec<(u64, f64)> = self.entries.iter().map(|(&m, &v)| (m, v)).collect();
        keys.sort_by_key(|&(m, _)| (m.count_ones(), m));
        keys.into_iter()
    }

    /// Entries of one coalition size, mask-ascending.
    pub fn entries_of_size(&self, size: usize) -> Vec<(u64, f64)> {
        self.entries
            .iter()
            .filter(|(m, _)| m.count_ones() as usize == size)
            .map(|(&m, &v)| (m, v))
            .collect()
    }

    /// Sum of all stored values (the efficiency total for k-Shapley values).
    pub fn sum(&self) -> f64 {
        crate::exact::pairwise_sum_iter(self.entries.values().copied())
    }

    /// Largest absolute difference against `other` over the shared schema.
    ///
    /// # Errors
    ///
    /// Returns an error if the two containers have different `n` or key sets.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_keys(other)?;
        Ok(self
            .entries
            .iter()
            .map(|(m, v)| (v - other.entries[m]).abs())
            .fold(0.0, f64::max))
    }

    /// Verifies that `other` covers exactly the same coalitions.
    ///
    /// # Errors
    ///
    /// Returns [`Error::KeyMismatch`] describing the first discrepancy.
    pub fn check_same_keys(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::KeyMismatch {
                order: self.order,
                reason: format!("player counts differ: {} vs {}", self.n, other.n),
            });
        }
        if let Some(m) = self.entries.keys().find(|m| !other.entries.contains_key(m)) {
            return Err(Error::KeyMismatch {
                order: self.order,
                reason: format!("coalition {m:#b} missing from the right-hand side"),
            });
        }
        if let Some(m) = other.entries.keys().find(|m| !self.entries.contains_key(m)) {
            return Err(Error::KeyMismatch {
                order: self.order,
                reason: format!("coalition {m:#b} missing from the left-hand side"),
            });
        }
        Ok(())
    }

    /// Serializes to the JSON schema, with optional run provenance.
    ///
    /// # Errors
    ///
    /// Returns an error if any stored value is non-finite.
    pub fn to_json_string(&self, run: Option<&RunMetadata>) -> Result<String> {
        jsonio::to_json_string(&self.to_file(run)?)
    }

    /// Writes the JSON schema to `path`, with optional run provenance.
    ///
    /// # Errors
    ///
    /// Returns an error if a value is non-finite or the write fails.
    pub fn write_json(&self, path: &Path, run: Option<&RunMetadata>) -> Result<()> {
        jsonio::write_json_file(path, &self.to_file(run)?)
    }

    fn to_file(&self, run: Option<&RunMetadata>) -> Result<ValuesFile> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (mask, value) in self.iter() {
            jsonio::ensure_finite(value, "interaction value")?;
            let coalition = Coalition::new(mask, self.n).expect("keys validated on insert");
            entries.push(EntryFile { subset: coalition.players(), value });
        }
        Ok(ValuesFile {
            n: self.n,
            order: self.order,
            index: self.kind,
            entries,
            run: run.cloned(),
        })
    }

    /// Parses the JSON schema (provenance, if present, is returned too).
    ///
    /// # Errors
    ///
    /// Returns an error on parse failure, invalid subsets, or duplicates.
    pub fn from_json_str(text: &str) -> Result<(Self, Option<RunMetadata>)> {
        let file: ValuesFile = serde_json::from_str(text)?;
        let mut values = Self::new(file.n, file.order, file.index)?;
        for entry in &file.entries {
            let coalition = Coalition::from_players(&entry.subset, file.n)?;
            if values.entries.contains_key(&coalition.mask()) {
                return Err(Error::InvalidArtifact {
                    what: "interaction values",
                    reason: format!("duplicate subset {coalition}"),
                });
            }
            values.set(coalition.mask(), entry.value)?;
        }
        Ok((values, file.run))
    }

    /// Reads the JSON schema from `path`.
    ///
    /// # Errors
    ///
    /// Same conditions as [`InteractionValues::from_json_str`], plus I/O.
    pub fn read_json(path: &Path) -> Result<(Self, Option<RunMetadata>)> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}
