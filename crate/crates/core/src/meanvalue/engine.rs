//! Multiset meet-in-the-middle tables.
//!
//! A table maps a packed power-sum key `v` to `m(v)`, the (weighted) number
//! of ordered tuples whose power sums equal `v`. Tuples are generated as
//! multisets (non-decreasing member indices) and each multiset contributes
//! its multinomial count of orderings, so the tuple side costs
//! `C(Y+s-1, s)` instead of `Y^s`.
//!
//! A tuple may be split into blocks drawn from different member lists (the
//! two-class mean values need this); the multinomial is then the product of
//! the per-block multinomials.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::system::PolySystem;
use crate::error::{Error, Result};
use crate::scalar::{Real, Tally};
use crate::Budget;

/// Power sums packed into one byte string; never hashed lossily.
pub type PackedKey = SmallVec<[u8; 32]>;

/// Number of fixed work partitions. Independent of the worker count so that
/// floating-point merges are reproducible.
const CHUNKS: usize = 64;

/// Upper limit on the number of variables, keeping `n!` inside `u128`.
pub const MAX_VARIABLES: usize = 32;

/// How keys are laid out in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyLayout {
    /// Exact sums as 16-byte big-endian `i128`.
    Wide,
    /// Residues mod `p^B` as 8-byte big-endian `u64`.
    Residue,
    /// Exact sums of arbitrary size: 2-byte length then signed big-endian bytes.
    Big,
}

/// Member values `φ_j(x)`, exact or reduced mod a modulus.
pub struct Evaluations {
    k: usize,
    rows: usize,
    layout: KeyLayout,
    modulus: Option<u64>,
    small: Vec<i128>,
    big: Vec<BigInt>,
}

impl Evaluations {
    /// Evaluates the system at each member. In exact mode the 128-bit path
    /// is used when `total_vars · max|φ_j(x)|` stays below `2^126`; otherwise
    /// values escalate to arbitrary precision.
    pub fn new(system: &PolySystem, members: &[u64], modulus: Option<u64>, total_vars: usize) -> Result<Self> {
        let k = system.k();
        let rows = members.len();
        if let Some(m) = modulus {
            if m < 2 {
                return Err(Error::param("modulus must be at least 2"));
            }
            let small = members
                .iter()
                .flat_map(|&x| system.polys().iter().map(move |p| p.eval_mod(x, m) as i128))
                .collect();
            return Ok(Evaluations {
                k,
                rows,
                layout: KeyLayout::Residue,
                modulus,
                small,
                big: Vec::new(),
            });
        }
        let limit: i128 = 1 << 126;
        let small: Option<Vec<i128>> = members
            .iter()
            .flat_map(|&x| system.polys().iter().map(move |p| p.eval_i128(x)))
            .collect();
        if let Some(small) = small {
            let max_abs = small.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
            let fits = max_abs
                .checked_mul(total_vars.max(1) as u128)
                .is_some_and(|b| b < limit as u128);
            if fits {
                return Ok(Evaluations {
                    k,
                    rows,
                    layout: KeyLayout::Wide,
                    modulus: None,
                    small,
                    big: Vec::new(),
                });
            }
        }
        log::info!("power sums exceed the 128-bit fast path; escalating keys to arbitrary precision");
        let big = members
            .iter()
            .flat_map(|&x| system.polys().iter().map(move |p| p.eval_big(x)))
            .collect();
        Ok(Evaluations {
            k,
            rows,
            layout: KeyLayout::Big,
            modulus: None,
            small: Vec::new(),
            big,
        })
    }

    pub fn layout(&self) -> KeyLayout {
        self.layout
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Width of the value range of coordinate `j`, times `n` variables.
    fn key_space(&self, n: usize) -> f64 {
        if let Some(m) = self.modulus {
            return (m as f64).powi(self.k as i32);
        }
        (0..self.k)
            .map(|j| {
                let (lo, hi) = match self.layout {
                    KeyLayout::Big => {
                        let col = (0..self.rows).map(|r| self.big[r * self.k + j].to_f64().unwrap_or(f64::MAX));
                        col.fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)))
                    }
                    _ => {
                        let col = (0..self.rows).map(|r| self.small[r * self.k + j] as f64);
                        col.fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)))
                    }
                };
                n as f64 * (hi - lo).max(0.0) + 1.0
            })
            .product()
    }
}

/// `size` variables drawn (as a multiset) from `members`, which index rows
/// of an [`Evaluations`].
#[derive(Debug, Clone)]
pub struct Block {
    pub members: Vec<usize>,
    pub size: usize,
}

/// `C(n + r - 1, r)`, saturating.
pub fn multiset_count(n: usize, r: usize) -> u128 {
    if r == 0 {
        return 1;
    }
    if n == 0 {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..r as u128 {
        let num = n as u128 + i;
        match acc.checked_mul(num) {
            Some(v) => acc = v / (i + 1),
            None => {
                // Fall back to arbitrary precision only to decide saturation.
                let exact = (0..r as u64).fold(BigUint::one(), |a, i| a * (n as u64 + i) / (i + 1));
                return exact.to_u128().unwrap_or(u128::MAX);
            }
        }
    }
    acc
}

/// Number of leaves the enumeration will visit.
pub fn leaf_count(blocks: &[Block]) -> u128 {
    blocks
        .iter()
        .map(|b| multiset_count(b.members.len(), b.size))
        .fold(1u128, |a, c| a.saturating_mul(c))
}

/// A finished multiplicity table.
#[derive(Debug, Clone)]
pub struct Table<T> {
    k: usize,
    layout: KeyLayout,
    entries: FxHashMap<PackedKey, T>,
}

impl<T: Tally> Table<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn layout(&self) -> KeyLayout {
        self.layout
    }

    /// `Σ_v m(v)·conj(m(v))`.
    pub fn sum_squares(&self) -> T {
        let mut acc = T::zero();
        for v in self.entries.values() {
            acc.add_assign(&v.abs_sq());
        }
        acc
    }

    /// `Σ_v m(v)·conj(m(v))` over keys whose first coordinate is `≤ bound`.
    pub fn sum_squares_bounded(&self, bound: &BigInt) -> T {
        let mut acc = T::zero();
        for (key, v) in &self.entries {
            if &self.decode(key)[0] <= bound {
                acc.add_assign(&v.abs_sq());
            }
        }
        acc
    }

    /// `Σ_v m(v)`.
    pub fn total(&self) -> T {
        let mut acc = T::zero();
        for v in self.entries.values() {
            acc.add_assign(v);
        }
        acc
    }

    pub fn get(&self, values: &[BigInt]) -> Option<&T> {
        let key = encode(self.layout, values);
        self.entries.get(&key)
    }

    /// Entries sorted by key bytes.
    pub fn sorted_entries(&self) -> Vec<(&PackedKey, &T)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Unpacks a key into its `k` coordinates.
    pub fn decode(&self, key: &[u8]) -> Vec<BigInt> {
        decode(self.layout, self.k, key)
    }
}

fn encode(layout: KeyLayout, values: &[BigInt]) -> PackedKey {
    let mut key = PackedKey::new();
    for v in values {
        match layout {
            KeyLayout::Wide => key.extend_from_slice(&v.to_i128().expect("fits").to_be_bytes()),
            KeyLayout::Residue => key.extend_from_slice(&v.to_u64().expect("fits").to_be_bytes()),
            KeyLayout::Big => push_big(&mut key, v),
        }
    }
    key
}

fn push_big(key: &mut PackedKey, v: &BigInt) {
    let bytes = v.to_signed_bytes_be();
    key.extend_from_slice(&(bytes.len() as u16).to_be_bytes());
    key.extend_from_slice(&bytes);
}

fn decode(layout: KeyLayout, k: usize, key: &[u8]) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(k);
    let mut rest = key;
    for _ in 0..k {
        match layout {
            KeyLayout::Wide => {
                let (head, tail) = rest.split_at(16);
                out.push(BigInt::from(i128::from_be_bytes(head.try_into().unwrap())));
                rest = tail;
            }
            KeyLayout::Residue => {
                let (head, tail) = rest.split_at(8);
                out.push(BigInt::from(u64::from_be_bytes(head.try_into().unwrap())));
                rest = tail;
            }
            KeyLayout::Big => {
                let len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
                let bytes = &rest[2..2 + len];
                out.push(if bytes.is_empty() {
                    BigInt::zero()
                } else {
                    BigInt::from_signed_bytes_be(bytes)
                });
                rest = &rest[2 + len..];
            }
        }
    }
    out
}

trait KeyArith: Sync {
    type V: Clone + Send + Sync;
    fn zero(&self) -> Self::V;
    fn add(&self, acc: &[Self::V], row: usize, out: &mut [Self::V]);
    fn pack(&self, values: &[Self::V], key: &mut PackedKey);
}

struct SmallArith<'a> {
    k: usize,
    vals: &'a [i128],
    modulus: Option<i128>,
}

impl KeyArith for SmallArith<'_> {
    type V = i128;

    fn zero(&self) -> i128 {
        0
    }

    #[inline]
    fn add(&self, acc: &[i128], row: usize, out: &mut [i128]) {
        let vals = &self.vals[row * self.k..(row + 1) * self.k];
        match self.modulus {
            Some(m) => {
                for j in 0..self.k {
                    let s = acc[j] + vals[j];
                    out[j] = if s >= m { s - m } else { s };
                }
            }
            None => {
                for j in 0..self.k {
                    out[j] = acc[j] + vals[j];
                }
            }
        }
    }

    #[inline]
    fn pack(&self, values: &[i128], key: &mut PackedKey) {
        for &v in values {
            if self.modulus.is_some() {
                key.extend_from_slice(&(v as u64).to_be_bytes());
            } else {
                key.extend_from_slice(&v.to_be_bytes());
            }
        }
    }
}

struct BigArith<'a> {
    k: usize,
    vals: &'a [BigInt],
}

impl KeyArith for BigArith<'_> {
    type V = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }

    fn add(&self, acc: &[BigInt], row: usize, out: &mut [BigInt]) {
        let vals = &self.vals[row * self.k..(row + 1) * self.k];
        for j in 0..self.k {
            out[j] = &acc[j] + &vals[j];
        }
    }

    fn pack(&self, values: &[BigInt], key: &mut PackedKey) {
        for v in values {
            push_big(key, v);
        }
    }
}

struct Walker<'a, T: Tally, A: KeyArith> {
    arith: &'a A,
    blocks: &'a [Block],
    block_of: &'a [usize],
    block_start: &'a [usize],
    weights: Option<&'a [T]>,
    k: usize,
    n: usize,
    sums: Vec<A::V>,
    wts: Vec<T>,
    mult: Vec<u128>,
    key: PackedKey,
    map: FxHashMap<PackedKey, T>,
}

impl<T: Tally, A: KeyArith> Walker<'_, T, A> {
    fn run_chunk(&mut self, chunk: usize) {
        if self.n == 0 {
            self.mult[0] = 1;
            self.leaf();
            return;
        }
        let len = self.blocks[self.block_of[0]].members.len();
        for i in (chunk..len).step_by(CHUNKS) {
            self.step(0, i, 1);
        }
    }

    /// Places member index `i` (of the current block's list) at `pos`.
    #[inline]
    fn step(&mut self, pos: usize, i: usize, run: u32) {
        let k = self.k;
        let b = self.block_of[pos];
        let row = self.blocks[b].members[i];
        let placed = (pos - self.block_start[pos] + 1) as u128;
        self.mult[pos + 1] = self.mult[pos] * placed / run as u128;
        if let Some(w) = self.weights {
            let next = self.wts[pos].mul(&w[row]);
            if next.is_zero() {
                return;
            }
            self.wts[pos + 1] = next;
        }
        let (head, tail) = self.sums.split_at_mut((pos + 1) * k);
        self.arith.add(&head[pos * k..], row, &mut tail[..k]);
        self.descend(pos + 1, i, run);
    }

    fn descend(&mut self, pos: usize, prev: usize, run: u32) {
        if pos == self.n {
            self.leaf();
            return;
        }
        let b = self.block_of[pos];
        let len = self.blocks[b].members.len();
        if pos == self.block_start[pos] {
            for i in 0..len {
                self.step(pos, i, 1);
            }
        } else {
            self.step(pos, prev, run + 1);
            for i in prev + 1..len {
                self.step(pos, i, 1);
            }
        }
    }

    #[inline]
    fn leaf(&mut self) {
        let n = self.n;
        let k = self.k;
        let mut contribution = T::from_u128(self.mult[n]);
        if self.weights.is_some() {
            contribution = contribution.mul(&self.wts[n]);
        }
        self.key.clear();
        self.arith.pack(&self.sums[n * k..(n + 1) * k], &mut self.key);
        match self.map.get_mut(self.key.as_slice()) {
            Some(v) => v.add_assign(&contribution),
            None => {
                self.map.insert(self.key.clone(), contribution);
            }
        }
    }
}

/// Builds the multiplicity table of the concatenated blocks.
///
/// Work is split into a fixed number of partitions by the first variable's
/// member index; partition tables are merged key-wise in partition order, so
/// the result is identical for any worker count.
pub fn build_table<T: Tally>(
    evals: &Evaluations,
    blocks: &[Block],
    weights: Option<&[T]>,
    budget: &Budget,
) -> Result<Table<T>> {
    let blocks: Vec<Block> = blocks.iter().filter(|b| b.size > 0).cloned().collect();
    let n: usize = blocks.iter().map(|b| b.size).sum();
    if n > MAX_VARIABLES {
        return Err(Error::param(format!("at most {MAX_VARIABLES} variables per side")));
    }
    if let Some(w) = weights {
        if w.len() != evals.rows {
            return Err(Error::param("weight vector length does not match members"));
        }
    }
    let leaves = leaf_count(&blocks);
    budget.check_tuples("multiset enumeration", leaves)?;
    let key_bytes = match evals.layout {
        KeyLayout::Wide => 16,
        KeyLayout::Residue => 8,
        KeyLayout::Big => 24,
    } * evals.k;
    let per_entry = (std::mem::size_of::<PackedKey>().max(key_bytes) + std::mem::size_of::<T>() + 16) as f64;
    let keys = (leaves as f64).min(evals.key_space(n));
    budget.check_memory("multiplicity table", (keys * per_entry).min(u128::MAX as f64) as u128)?;

    let mut block_of = Vec::with_capacity(n);
    let mut block_start = Vec::with_capacity(n);
    for (b, block) in blocks.iter().enumerate() {
        let start = block_of.len();
        for _ in 0..block.size {
            block_of.push(b);
            block_start.push(start);
        }
    }

    let chunk_ids: Vec<usize> = if n == 0 { vec![0] } else { (0..CHUNKS).collect() };

    #[allow(clippy::too_many_arguments)]
    fn run<T: Tally, A: KeyArith>(
        arith: &A,
        zero: A::V,
        blocks: &[Block],
        block_of: &[usize],
        block_start: &[usize],
        weights: Option<&[T]>,
        k: usize,
        n: usize,
        chunk_ids: &[usize],
    ) -> Vec<FxHashMap<PackedKey, T>> {
        chunk_ids
            .par_iter()
            .map(|&chunk| {
                let mut w = Walker {
                    arith,
                    blocks,
                    block_of,
                    block_start,
                    weights,
                    k,
                    n,
                    sums: vec![zero.clone(); (n + 1) * k],
                    wts: vec![T::from_u128(1); n + 1],
                    mult: vec![1; n + 1],
                    key: PackedKey::new(),
                    map: FxHashMap::default(),
                };
                w.run_chunk(chunk);
                w.map
            })
            .collect()
    }

    let k = evals.k;
    let parts = match evals.layout {
        KeyLayout::Big => {
            let arith = BigArith { k, vals: &evals.big };
            run(
                &arith,
                arith.zero(),
                &blocks,
                &block_of,
                &block_start,
                weights,
                k,
                n,
                &chunk_ids,
            )
        }
        _ => {
            let arith = SmallArith {
                k,
                vals: &evals.small,
                modulus: evals.modulus.map(|m| m as i128),
            };
            run(
                &arith,
                arith.zero(),
                &blocks,
                &block_of,
                &block_start,
                weights,
                k,
                n,
                &chunk_ids,
            )
        }
    };

    let mut parts = parts.into_iter();
    let mut entries = parts.next().unwrap_or_default();
    for part in parts {
        for (key, v) in part {
            match entries.get_mut(&key) {
                Some(acc) => acc.add_assign(&v),
                None => {
                    entries.insert(key, v);
                }
            }
        }
    }
    Ok(Table {
        k,
        layout: evals.layout,
        entries,
    })
}

/// Unit-weight `Σ m(v)²`, on `u128` when `∏ len_b^{2 size_b}` fits and on
/// arbitrary precision otherwise.
pub fn unit_sum_squares(
    evals: &Evaluations,
    blocks: &[Block],
    bound: Option<&BigInt>,
    budget: &Budget,
) -> Result<(BigUint, usize)> {
    let ceiling = blocks.iter().fold(BigUint::one(), |acc, b| {
        acc * num_traits::pow(BigUint::from(b.members.len()), 2 * b.size)
    });
    if ceiling < BigUint::one() << 127u32 {
        let t = build_table::<u128>(evals, blocks, None, budget)?;
        let s = match bound {
            Some(b) => t.sum_squares_bounded(b),
            None => t.sum_squares(),
        };
        Ok((BigUint::from(s), t.len()))
    } else {
        let t = build_table::<BigUint>(evals, blocks, None, budget)?;
        let s = match bound {
            Some(b) => t.sum_squares_bounded(b),
            None => t.sum_squares(),
        };
        Ok((s, t.len()))
    }
}

/// Weighted `Σ m(v)²`. Exact weights are scaled to integers by a common
/// denominator and tallied on integers; double weights are tallied directly.
pub fn weighted_sum_squares<W: Real>(
    evals: &Evaluations,
    blocks: &[Block],
    weights: &[W],
    budget: &Budget,
) -> Result<W> {
    match W::integer_scaling(weights) {
        Some((ints, denom)) => {
            let n: usize = blocks.iter().map(|b| b.size).sum();
            let ceiling = blocks.iter().fold(BigUint::one(), |acc, b| {
                let mass: BigUint = b.members.iter().map(|&r| &ints[r]).sum();
                acc * num_traits::pow(mass, 2 * b.size)
            });
            let count = if ceiling < BigUint::one() << 127u32 {
                let small: Vec<u128> = ints.iter().map(|v| v.to_u128().expect("bounded")).collect();
                BigUint::from(build_table::<u128>(evals, blocks, Some(&small), budget)?.sum_squares())
            } else {
                build_table::<BigUint>(evals, blocks, Some(&ints), budget)?.sum_squares()
            };
            Ok(W::from_biguint(&count).div(&denom.powi(2 * n as i32)))
        }
        None => Ok(build_table::<W>(evals, blocks, Some(weights), budget)?.sum_squares()),
    }
}

/// Hex rendering of a packed key.
pub fn key_hex(key: &[u8]) -> String {
    key.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks_for(rows: usize, size: usize) -> Vec<Block> {
        vec![Block {
            members: (0..rows).collect(),
            size,
        }]
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multiset_count(4, 2), 10);
        assert_eq!(multiset_count(729, 3), 64_836_045);
        assert_eq!(multiset_count(0, 0), 1);
        assert_eq!(multiset_count(0, 3), 0);
        assert_eq!(multiset_count(5, 0), 1);
    }

    #[test]
    fn table_matches_ordered_enumeration() {
        let sys = PolySystem::powers(&[1, 2]).unwrap();
        let members = [1u64, 3, 4, 9, 10];
        let ev = Evaluations::new(&sys, &members, None, 3).unwrap();
        let t = build_table::<u128>(&ev, &blocks_for(5, 3), None, &Budget::default()).unwrap();
        let mut direct: FxHashMap<(i128, i128), u128> = FxHashMap::default();
        for &a in &members {
            for &b in &members {
                for &c in &members {
                    let key = ((a + b + c) as i128, (a * a + b * b + c * c) as i128);
                    *direct.entry(key).or_default() += 1;
                }
            }
        }
        assert_eq!(t.len(), direct.len());
        for ((s1, s2), m) in direct {
            let got = t.get(&[BigInt::from(s1), BigInt::from(s2)]).unwrap();
            assert_eq!(*got, m);
        }
        assert_eq!(t.total(), 125);
    }

    #[test]
    fn big_layout_round_trips() {
        let sys = PolySystem::powers(&[1, 15]).unwrap();
        let members = [1u64 << 20, 3 << 20];
        let ev = Evaluations::new(&sys, &members, None, 2).unwrap();
        assert_eq!(ev.layout(), KeyLayout::Big);
        let t = build_table::<u128>(&ev, &blocks_for(2, 2), None, &Budget::default()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.total(), 4);
        for (key, _) in t.sorted_entries() {
            let vals = t.decode(key);
            assert_eq!(encode(KeyLayout::Big, &vals).as_slice(), key.as_slice());
        }
    }

    #[test]
    fn budget_refusal() {
        let sys = PolySystem::powers(&[1]).unwrap();
        let members: Vec<u64> = (1..=100).collect();
        let ev = Evaluations::new(&sys, &members, None, 4).unwrap();
        let tight = Budget::default().with_tuples(1000);
        let err = build_table::<u128>(&ev, &blocks_for(100, 4), None, &tight).unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn empty_blocks_give_unit_table() {
        let sys = PolySystem::powers(&[1]).unwrap();
        let ev = Evaluations::new(&sys, &[1, 2], None, 0).unwrap();
        let t = build_table::<u128>(&ev, &blocks_for(2, 0), None, &Budget::default()).unwrap();
        assert_eq!(t.sum_squares(), 1);
    }
}
