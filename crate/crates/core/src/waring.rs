//! Sums of `k`-th powers of members of `E`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::digit_core::DigitSet;
use crate::error::{Error, Result};
use crate::meanvalue::engine::{self, Block, Evaluations};
use crate::meanvalue::PolySystem;
use crate::Budget;

/// `R(n) = #{x ∈ E^s : Σ x_i^k = n}` for `n ≤ X`, stored sparsely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentationTable {
    pub s: usize,
    pub k: u32,
    pub x: u64,
    /// `#E(X)`.
    pub y: u64,
    /// Members with `x^k ≤ X`.
    pub bases: Vec<u64>,
    entries: BTreeMap<u64, u128>,
    /// Tuples whose power sum exceeds `X`.
    pub overflow: u128,
}

/// Builds the table from the multiset power-sum engine with the single
/// polynomial `z^k`.
pub fn representation_table(set: &DigitSet, s: usize, k: u32, x: u64, budget: &Budget) -> Result<RepresentationTable> {
    if s == 0 || k == 0 {
        return Err(Error::param("need s ≥ 1 and k ≥ 1"));
    }
    let y = set.count_members(x)?;
    let root = integer_root(x, k);
    let bases = set.enumerate(root)?.members;
    let system = PolySystem::powers(&[k])?;
    let evals = Evaluations::new(&system, &bases, None, s)?;
    let blocks = [Block {
        members: (0..bases.len()).collect(),
        size: s,
    }];
    let table = engine::build_table::<u128>(&evals, &blocks, None, budget)?;
    let mut entries = BTreeMap::new();
    let mut overflow = 0u128;
    for (key, m) in table.sorted_entries() {
        let n = &table.decode(key)[0];
        match n.to_u64().filter(|&n| n <= x) {
            Some(n) => {
                entries.insert(n, *m);
            }
            None => overflow += m,
        }
    }
    Ok(RepresentationTable {
        s,
        k,
        x,
        y,
        bases,
        entries,
        overflow,
    })
}

/// `⌊x^{1/k}⌋`.
fn integer_root(x: u64, k: u32) -> u64 {
    let mut r = (x as f64).powf(1.0 / k as f64) as u64;
    while r > 0 && r.checked_pow(k).is_none_or(|v| v > x) {
        r -= 1;
    }
    while r.checked_add(1).and_then(|n| n.checked_pow(k)).is_some_and(|v| v <= x) {
        r += 1;
    }
    r
}

impl RepresentationTable {
    /// `R(n)`, zero off the table.
    pub fn get(&self, n: u64) -> u128 {
        self.entries.get(&n).copied().unwrap_or(0)
    }

    /// Nonzero `(n, R(n))` in increasing `n`.
    pub fn rows(&self) -> impl Iterator<Item = (u64, u128)> + '_ {
        self.entries.iter().map(|(&n, &r)| (n, r))
    }

    /// `Σ_{n ≤ X} R(n)`.
    pub fn sum_r(&self) -> u128 {
        self.entries.values().sum()
    }

    /// `Σ_{n ≤ X} R(n)²`.
    pub fn sum_r2(&self) -> BigUint {
        self.entries.values().map(|&r| BigUint::from(r) * r).sum()
    }

    /// `(#bases)^s`: every tuple is either tabulated or overflows.
    pub fn total_tuples(&self) -> BigUint {
        num_traits::pow(BigUint::from(self.bases.len()), self.s)
    }

    pub fn reconciles(&self) -> bool {
        BigUint::from(self.sum_r()) + self.overflow == self.total_tuples()
    }
}

/// `N_{s,k}(X) = #{n ≤ X : R(n) ≥ 1}`.
pub fn represented_count(table: &RepresentationTable) -> u64 {
    table.entries.len() as u64
}

/// `(Σ R)² ≤ N · Σ R²`, with the implied lower bound on `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyCheck {
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub holds: bool,
    /// `(Σ R)² / Σ R²`, or 0 for an empty table.
    pub lower_bound: f64,
}

pub fn cauchy_bound_check(table: &RepresentationTable) -> CauchyCheck {
    let sum = BigUint::from(table.sum_r());
    let sum2 = table.sum_r2();
    let lhs = &sum * &sum;
    let rhs = BigUint::from(represented_count(table)) * &sum2;
    let lower_bound = if sum2.is_zero() {
        0.0
    } else {
        crate::scalar::ratio_to_f64(&num_rational::BigRational::new(lhs.clone().into(), sum2.into()))
    };
    CauchyCheck {
        holds: lhs <= rhs,
        lhs,
        rhs,
        lower_bound,
    }
}

/// The summary record of a Waring run.
#[derive(Debug, Clone, PartialEq)]
pub struct WaringSummary {
    pub s: usize,
    pub k: u32,
    pub x: u64,
    pub y: u64,
    pub n: u64,
    pub sum_r: u128,
    pub sum_r2: BigUint,
    pub cauchy_lower_bound: f64,
}

pub fn summary(table: &RepresentationTable) -> WaringSummary {
    WaringSummary {
        s: table.s,
        k: table.k,
        x: table.x,
        y: table.y,
        n: represented_count(table),
        sum_r: table.sum_r(),
        sum_r2: table.sum_r2(),
        cauchy_lower_bound: cauchy_bound_check(table).lower_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanvalue::{mitm_count, CountOptions};

    fn binary() -> DigitSet {
        DigitSet::new(3, [0, 1]).unwrap()
    }

    #[test]
    fn small_tables() {
        let t = representation_table(&binary(), 1, 2, 16, &Budget::default()).unwrap();
        assert_eq!(t.rows().collect::<Vec<_>>(), vec![(1, 1), (9, 1), (16, 1)]);
        assert_eq!(represented_count(&t), 3);

        let t = representation_table(&binary(), 2, 1, 8, &Budget::default()).unwrap();
        let expect = [(2, 1), (4, 2), (5, 2), (6, 1), (7, 2), (8, 1)];
        assert_eq!(t.rows().collect::<Vec<_>>(), expect);
        assert!(t.reconciles());
        assert!((0..2).all(|n| t.get(n) == 0));
    }

    #[test]
    fn full_digit_set_represents_everything() {
        let full = DigitSet::full(5).unwrap();
        let t = representation_table(&full, 1, 1, 200, &Budget::default()).unwrap();
        assert_eq!(represented_count(&t), 200);
    }

    #[test]
    fn golden_summary() {
        let set = DigitSet::new(5, [0, 1, 4]).unwrap();
        let t = representation_table(&set, 2, 2, 625, &Budget::default()).unwrap();
        let s = summary(&t);
        assert_eq!((s.y, t.bases.len(), s.sum_r, s.n), (81, 9, 53, 29));
        assert_eq!(s.sum_r2, BigUint::from(101u32));
        let c = cauchy_bound_check(&t);
        assert_eq!(c.lhs, BigUint::from(2809u32));
        assert_eq!(c.rhs, BigUint::from(2929u32));
        assert!(c.holds);
        assert!((c.lower_bound - 27.81188118811881).abs() < 1e-12);
        assert!(t.reconciles());

        let opts = CountOptions {
            key_bound: Some(625),
            ..Default::default()
        };
        let m = mitm_count(&PolySystem::powers(&[2]).unwrap(), 2, &t.bases, &opts).unwrap();
        assert_eq!(m.exact(), Some(&s.sum_r2));
    }

    #[test]
    fn degenerate_and_equality_cases() {
        let t = representation_table(&binary(), 2, 1, 1, &Budget::default()).unwrap();
        assert_eq!(represented_count(&t), 0);
        let c = cauchy_bound_check(&t);
        assert!(c.holds && c.lower_bound == 0.0);

        let t = representation_table(&binary(), 1, 1, 2, &Budget::default()).unwrap();
        let c = cauchy_bound_check(&t);
        assert_eq!(c.lhs, c.rhs);
    }

    #[test]
    fn integer_roots() {
        assert_eq!(integer_root(625, 2), 25);
        assert_eq!(integer_root(624, 2), 24);
        assert_eq!(integer_root(u64::MAX, 1), u64::MAX);
        assert_eq!(integer_root(26, 3), 2);
        assert_eq!(integer_root(0, 2), 0);
    }
}
