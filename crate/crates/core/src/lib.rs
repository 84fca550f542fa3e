//! Exact counting over ellipsephic sets: integers whose base-`p` digits are
//! drawn from a fixed digit set.
//!
//! The crate is organised around the objects that appear when bounding
//! Vinogradov-type mean values over such sets:
//!
//! - [`digit_core`]: digit sets, enumeration of `E(X)`, and representation
//!   profiles of the digit source (the `E_t*` property).
//! - [`meanvalue`]: the number of solutions of `Σφ_j(x_i) = Σφ_j(y_i)`,
//!   counted by brute force and by a meet-in-the-middle multiplicity table.
//! - [`congruence`]: restricted exponential sums, class norms, and the
//!   congruence mean values `U^B`, `U^{B,h}` and `K` over the grid `u/p^B`.
//! - [`lifting`]: carry-tuple decomposition of digit-sum congruences and the
//!   modulus-lifting chain for `p^c`-spaced linear systems.
//! - [`waring`]: representation counts for sums of `k`-th powers over `E`.
//!
//! Counting paths are exact (integers or rationals). Grid paths use
//! double-precision complex arithmetic and are cross-checked against them.

pub mod congruence;
pub mod digit_core;
pub mod error;
pub mod export;
pub mod lifting;
pub mod meanvalue;
pub mod scalar;
pub mod stats;
pub mod waring;

pub use digit_core::{DigitSet, DigitSource, EllipsephicEnumeration, RepProfile};
pub use error::{Error, Result};
pub use meanvalue::{CountResult, PolySystem, SpacedSystem};

/// Resource limits applied before any exhaustive computation starts.
///
/// Operations that would exceed a limit refuse up front with
/// [`Error::Budget`]; they never return a partial count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of tuple evaluations (leaves of an enumeration).
    pub tuples: u128,
    /// Maximum estimated table memory, in bytes.
    pub memory_bytes: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            tuples: 1_000_000_000,
            memory_bytes: 4 << 30,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget {
            tuples: u128::MAX,
            memory_bytes: u128::MAX,
        }
    }

    pub fn with_tuples(mut self, tuples: u128) -> Self {
        self.tuples = tuples;
        self
    }

    pub(crate) fn check_tuples(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.tuples {
            return Err(Error::Budget {
                what,
                needed,
                limit: self.tuples,
            });
        }
        Ok(())
    }

    pub(crate) fn check_memory(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.memory_bytes {
            return Err(Error::Budget {
                what,
                needed,
                limit: self.memory_bytes,
            });
        }
        Ok(())
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
