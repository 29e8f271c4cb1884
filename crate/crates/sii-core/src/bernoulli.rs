//! Bernoulli numbers of the first kind, exact.
//!
//! Convention: `B_1 = -1/2` (the "first kind" sign choice). These show up as
//! the aggregation coefficients that turn Shapley interaction indices into
//! k-interaction scores, and inside the λ weights of the k-additive
//! least-squares representation — both of which rely on exact cancellation
//! (e.g. λ(k, k) = 0), so the table is kept as exact rationals and converted
//! to `f64` only at the point of use.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact table of Bernoulli numbers `B_0 ..= B_max`.
#[derive(Debug, Clone)]
pub struct BernoulliTable {
    values: Vec<BigRational>,
}

impl BernoulliTable {
    /// Precomputes `B_0 ..= B_max` via the defining recurrence
    /// `sum_{j=0}^{m} C(m+1, j) * B_j = 0` for `m >= 1`, `B_0 = 1`.
    pub fn new(max: usize) -> Self {
        let mut values: Vec<BigRational> = Vec::with_capacity(max + 1);
        values.push(BigRational::one());
        for m in 1..=max {
            // B_m = -1/(m+1) * sum_{j=0}^{m-1} C(m+1, j) * B_j
            let mut acc = BigRational::zero();
            let mut binom = BigInt::one(); // C(m+1, 0)
            for (j, b) in values.iter().enumerate() {
                acc += BigRational::from_integer(binom.clone()) * b;
                // C(m+1, j+1) = C(m+1, j) * (m+1-j) / (j+1)
                binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
            }
            values.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
        }
        Self { values }
    }

    /// Largest index stored.
    pub fn max(&self) -> usize {
        self.values.len() - 1
    }

    /// Exact `B_m`.
    ///
    /// # Errors
    ///
    /// Returns an error if `m` is beyond the precomputed range.
    pub fn get(&self, m: usize) -> Result<&BigRational> {
        self.values.get(m).ok_or(Error::TableOutOfRange { index: m, size: self.values.len() })
    }

    /// `B_m` rounded to `f64`.
    ///
    /// # Errors
    ///
    /// Returns an error if `m` is beyond the precomputed range.
    pub fn get_f64(&self, m: usize) -> Result<f64> {
        Ok(rational_to_f64(self.get(m)?))
    }
}

/// Rounds an exact rational to the nearest `f64`.
///
/// `BigRational::to_f64` converts numerator and denominator separately and
/// can overflow to `inf/inf = NaN` for huge components; dividing after a
/// shared bit-length reduction avoids that. Values in this crate are far from
/// those extremes, but the helper is shared by all rational-to-float
/// boundaries so it is written defensively.
pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let numer = r.numer();
    let denom = r.denom();
    let shift = numer.abs().bits().max(denom.bits()).saturating_sub(1000) as usize;
    let n = (numer >> shift).to_f64().expect("reduced numerator fits f64 range");
    let d = (denom >> shift).to_f64().expect("reduced denominator fits f64 range");
    n / d
}
