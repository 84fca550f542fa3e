//! Solution counts for Vinogradov-type systems over a finite member list.
//!
//! `I_{s,k}` (unit weights) and `J_{s,k}` (general weights) count 2s-tuples
//! `(x, y)` with `Σ φ_j(x_i) = Σ φ_j(y_i)` for every `j`. Two independent
//! routes are provided: [`brute_force_count`], which walks the 2s-tuples
//! directly, and [`mitm_count`], which squares the multiplicities of a
//! multiset power-sum table.

pub mod engine;
mod system;

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;

pub use system::{Poly, PolySystem, SpacedSystem, Spacing};

use crate::congruence::WeightAssignment;
use crate::error::{Error, Result};
use crate::scalar::{CountValue, Real};
use crate::{stats, Budget};
use engine::{Block, Evaluations};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Brute,
    Mitm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Brute => "brute",
            Method::Mitm => "mitm",
        })
    }
}

/// Knobs shared by both counting routes.
#[derive(Debug, Clone, Default)]
pub struct CountOptions {
    pub budget: Budget,
    /// Compare power sums mod this modulus instead of exactly.
    pub modulus: Option<u64>,
    /// Only count solutions whose first power sum is `≤ key_bound` (on both
    /// sides, since they are equal).
    pub key_bound: Option<u64>,
}

impl CountOptions {
    pub fn modular(modulus: u64) -> Self {
        CountOptions {
            modulus: Some(modulus),
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.modulus.is_some() && self.key_bound.is_some() {
            return Err(Error::param("key_bound applies to exact mode only"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub count: CountValue,
    pub s: usize,
    pub k: usize,
    /// `Y`, the number of distinct members.
    pub y: usize,
    /// Largest member (0 for an empty list).
    pub max_member: u64,
    pub method: Method,
    pub elapsed: Duration,
}

fn prepare_members(members: &[u64]) -> Vec<u64> {
    let mut m = members.to_vec();
    m.sort_unstable();
    m.dedup();
    m
}

/// Exhaustive oracle over ordered tuples: every `x ∈ members^s` and
/// `y_1..y_{s-L}`, with the last `L = min(s, 2)` variables looked up by the
/// value vector of their sum. Costs `Y^(2s-L) + Y^L` steps, which is what the
/// budget is checked against.
pub fn brute_force_count(system: &PolySystem, s: usize, members: &[u64], opts: &CountOptions) -> Result<CountResult> {
    opts.validate()?;
    if s == 0 {
        return Err(Error::param("s must be at least 1"));
    }
    let start = Instant::now();
    let ms = prepare_members(members);
    let y = ms.len();
    let k = system.k();
    let tail = s.min(2);
    let steps = (y as u128)
        .checked_pow((2 * s - tail) as u32)
        .and_then(|n| n.checked_add((y as u128).pow(tail as u32)))
        .unwrap_or(u128::MAX);
    opts.budget.check_tuples("brute-force oracle", steps)?;

    let modulus = opts.modulus.map(|m| m as i128);
    let mut vals = Vec::with_capacity(y * k);
    for &x in &ms {
        for p in system.polys() {
            let v = match opts.modulus {
                Some(m) => p.eval_mod(x, m) as i128,
                None => p
                    .eval_i128(x)
                    .filter(|v| {
                        v.unsigned_abs()
                            .checked_mul(2 * s as u128)
                            .is_some_and(|b| b < 1 << 126)
                    })
                    .ok_or_else(|| Error::param("brute-force oracle is limited to 128-bit power sums"))?,
            };
            vals.push(v);
        }
    }
    let mut last: FxHashMap<Vec<i128>, u64> = FxHashMap::default();
    for a in vals.chunks(k) {
        if tail == 1 {
            *last.entry(a.to_vec()).or_default() += 1;
            continue;
        }
        for b in vals.chunks(k) {
            let key = a
                .iter()
                .zip(b)
                .map(|(u, v)| match modulus {
                    Some(m) => (u + v).rem_euclid(m),
                    None => u + v,
                })
                .collect();
            *last.entry(key).or_default() += 1;
        }
    }

    let oracle = BruteOracle {
        vals: &vals,
        k,
        s,
        y,
        leaf: 2 * s - tail,
        modulus,
        bound: opts.key_bound.map(|b| b as i128),
        last: &last,
    };
    let count: u128 = (0..y).into_par_iter().map(|first| oracle.count_from(first)).sum();

    Ok(CountResult {
        count: CountValue::Exact(BigUint::from(count)),
        s,
        k,
        y,
        max_member: ms.last().copied().unwrap_or(0),
        method: Method::Brute,
        elapsed: start.elapsed(),
    })
}

struct BruteOracle<'a> {
    vals: &'a [i128],
    k: usize,
    s: usize,
    y: usize,
    /// Number of variables placed before the table lookup.
    leaf: usize,
    modulus: Option<i128>,
    bound: Option<i128>,
    last: &'a FxHashMap<Vec<i128>, u64>,
}

impl BruteOracle<'_> {
    fn count_from(&self, first: usize) -> u128 {
        let k = self.k;
        // diff[d*k..] holds Σ φ(x) - Σ φ(y) after d placed variables.
        let depth = 2 * self.s;
        let mut diff = vec![0i128; depth * k];
        self.apply(&mut diff, 0, first);
        self.walk(&mut diff, 1)
    }

    fn apply(&self, diff: &mut [i128], pos: usize, member: usize) {
        let k = self.k;
        let row = &self.vals[member * k..(member + 1) * k];
        let sign = if pos < self.s { 1 } else { -1 };
        for j in 0..k {
            let prev = if pos == 0 { 0 } else { diff[(pos - 1) * k + j] };
            let mut v = prev + sign * row[j];
            if let Some(m) = self.modulus {
                v = v.rem_euclid(m);
            }
            diff[pos * k + j] = v;
        }
    }

    fn walk(&self, diff: &mut [i128], pos: usize) -> u128 {
        let k = self.k;
        if pos == self.leaf {
            let target = &diff[(pos - 1) * k..pos * k];
            // diff after the x-block is Σ φ_1(x); the y-side sum equals it.
            if self.bound.is_some_and(|b| diff[(self.s - 1) * k] > b) {
                return 0;
            }
            return self.last.get(target).copied().unwrap_or(0) as u128;
        }
        let mut total = 0u128;
        for m in 0..self.y {
            self.apply(diff, pos, m);
            total += self.walk(diff, pos + 1);
        }
        total
    }
}

/// Multiset meet-in-the-middle count: `Σ_v m(v)²` with unit weights.
pub fn mitm_count(system: &PolySystem, s: usize, members: &[u64], opts: &CountOptions) -> Result<CountResult> {
    opts.validate()?;
    let start = Instant::now();
    let ms = prepare_members(members);
    let evals = Evaluations::new(system, &ms, opts.modulus, s)?;
    let blocks = [Block {
        members: (0..ms.len()).collect(),
        size: s,
    }];
    let bound = opts.key_bound.map(BigInt::from);
    let (count, _) = engine::unit_sum_squares(&evals, &blocks, bound.as_ref(), &opts.budget)?;
    Ok(CountResult {
        count: CountValue::Exact(count),
        s,
        k: system.k(),
        y: ms.len(),
        max_member: ms.last().copied().unwrap_or(0),
        method: Method::Mitm,
        elapsed: start.elapsed(),
    })
}

/// Weighted count `Σ_v m(v)²`, each tuple weighted by `∏ 𝔞_{x_i}`. Members
/// outside the weight support get weight zero.
pub fn mitm_count_weighted<W: Real>(
    system: &PolySystem,
    s: usize,
    members: &[u64],
    weights: &WeightAssignment<W>,
    opts: &CountOptions,
) -> Result<CountResult> {
    opts.validate()?;
    if opts.key_bound.is_some() {
        return Err(Error::param("key_bound is only supported for unit weights"));
    }
    let start = Instant::now();
    let ms = prepare_members(members);
    let evals = Evaluations::new(system, &ms, opts.modulus, s)?;
    let w: Vec<W> = ms.iter().map(|&x| weights.weight(x)).collect();
    let blocks = [Block {
        members: (0..ms.len()).collect(),
        size: s,
    }];
    let count = engine::weighted_sum_squares(&evals, &blocks, &w, &opts.budget)?;
    Ok(CountResult {
        count: count.to_count_value(),
        s,
        k: system.k(),
        y: ms.len(),
        max_member: ms.last().copied().unwrap_or(0),
        method: Method::Mitm,
        elapsed: start.elapsed(),
    })
}

/// One histogram row: packed key in hex and its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramRow {
    pub key_hex: String,
    pub values: Vec<BigInt>,
    pub multiplicity: BigUint,
}

/// The unit-weight multiplicity table `v ↦ m(v)`, sorted by packed key.
pub fn multiplicity_histogram(
    system: &PolySystem,
    s: usize,
    members: &[u64],
    opts: &CountOptions,
) -> Result<Vec<HistogramRow>> {
    opts.validate()?;
    let ms = prepare_members(members);
    let evals = Evaluations::new(system, &ms, opts.modulus, s)?;
    let blocks = [Block {
        members: (0..ms.len()).collect(),
        size: s,
    }];
    let table = engine::build_table::<BigUint>(&evals, &blocks, None, &opts.budget)?;
    Ok(table
        .sorted_entries()
        .into_iter()
        .map(|(key, m)| HistogramRow {
            key_hex: engine::key_hex(key),
            values: table.decode(key),
            multiplicity: m.clone(),
        })
        .collect())
}

/// Number of `(x, y) ∈ [Y]^s × [Y]^s` with `y` a permutation of `x`.
///
/// Sums `(#distinct values chosen) · (orderings)²` over the partitions of
/// `s` that describe the multiplicity pattern of `x`.
pub fn diagonal_count(s: usize, y: u64) -> BigUint {
    fn partitions(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=n.min(max)).rev() {
            cur.push(part);
            partitions(n - part, part, cur, out);
            cur.pop();
        }
    }
    let factorial = |n: usize| (1..=n as u64).fold(BigUint::one(), |a, i| a * i);
    let mut parts = Vec::new();
    partitions(s, s, &mut Vec::new(), &mut parts);
    let mut total = BigUint::zero();
    for lambda in parts {
        let l = lambda.len() as u64;
        if l > y {
            continue;
        }
        let falling = (0..l).fold(BigUint::one(), |a, i| a * (y - i));
        let mut repeats = FxHashMap::<usize, usize>::default();
        for &part in &lambda {
            *repeats.entry(part).or_default() += 1;
        }
        let sym: BigUint = repeats.values().map(|&c| factorial(c)).product();
        let orderings = factorial(s) / lambda.iter().map(|&p| factorial(p)).product::<BigUint>();
        total += falling / sym * &orderings * &orderings;
    }
    total
}

/// `Y^(2s) · X^(-k(k+1)/2)`.
pub fn lower_bound_reference(s: usize, k: usize, x: u64, y: u64) -> f64 {
    let log = 2.0 * s as f64 * (y as f64).ln() - (k * (k + 1)) as f64 / 2.0 * (x as f64).ln();
    log.exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub x: u64,
    pub y: u64,
    pub count: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Least-squares slope of `ln(count)` against `ln(Y)`.
pub fn fit_exponent(points: &[FitPoint]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::Degenerate("exponent fit needs at least 3 points".into()));
    }
    if points.windows(2).any(|w| w[1].y <= w[0].y) {
        return Err(Error::Degenerate("Y must be strictly increasing".into()));
    }
    if points.iter().any(|p| p.y == 0 || p.count <= 0.0) {
        return Err(Error::Degenerate("counts and Y must be positive".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.y as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.count.ln()).collect();
    let (slope, intercept, residual) =
        stats::least_squares(&xs, &ys).ok_or_else(|| Error::Degenerate("constant Y".into()))?;
    Ok(ExponentFit {
        slope,
        intercept,
        residual,
    })
}

impl CountResult {
    pub fn exact(&self) -> Option<&BigUint> {
        self.count.as_exact()
    }

    pub fn fit_point(&self, x: u64) -> FitPoint {
        FitPoint {
            x,
            y: self.y as u64,
            count: self.count.to_f64(),
        }
    }

    /// Exact count as `u128`, when it is an exact value that fits.
    pub fn exact_u128(&self) -> Option<u128> {
        self.exact().and_then(|c| c.to_u128())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn pure(k: usize) -> SpacedSystem {
        SpacedSystem::pure_powers(3, k).unwrap()
    }

    fn opts() -> CountOptions {
        CountOptions::default()
    }

    const E9: [u64; 4] = [1, 3, 4, 9];

    #[test]
    fn golden_diagonal_cases() {
        for k in [1, 2] {
            let b = brute_force_count(&pure(k), 2, &E9, &opts()).unwrap();
            let m = mitm_count(&pure(k), 2, &E9, &opts()).unwrap();
            assert_eq!(b.exact_u128(), Some(28));
            assert_eq!(m.exact_u128(), Some(28));
        }
        assert_eq!(diagonal_count(2, 4), BigUint::from(28u32));
    }

    #[test]
    fn s_equals_one_counts_members() {
        for k in 1..=3 {
            assert_eq!(
                brute_force_count(&pure(k), 1, &E9, &opts()).unwrap().exact_u128(),
                Some(4)
            );
            assert_eq!(mitm_count(&pure(k), 1, &E9, &opts()).unwrap().exact_u128(), Some(4));
        }
    }

    #[test]
    fn diagonal_small_cases() {
        assert_eq!(diagonal_count(1, 4), BigUint::from(4u32));
        assert_eq!(diagonal_count(2, 1), BigUint::from(1u32));
        // Oracle: pairs of 3-tuples over [Y] with equal sorted contents.
        for y in 1..=5u64 {
            for s in 1..=3usize {
                let tuples: Vec<Vec<u64>> = (0..y.pow(s as u32))
                    .map(|mut n| {
                        let mut v: Vec<u64> = (0..s)
                            .map(|_| {
                                let d = n % y;
                                n /= y;
                                d
                            })
                            .collect();
                        v.sort_unstable();
                        v
                    })
                    .collect();
                let mut counts: FxHashMap<Vec<u64>, u64> = FxHashMap::default();
                for t in tuples {
                    *counts.entry(t).or_default() += 1;
                }
                let direct: u64 = counts.values().map(|c| c * c).sum();
                assert_eq!(diagonal_count(s, y), BigUint::from(direct), "s={s} y={y}");
            }
        }
    }

    #[test]
    fn golden_k2_s3_p5() {
        // Oracle: ordered-tuple dictionary count over E(125), p=5, digits {0,1,4}.
        let set = crate::DigitSet::new(5, [0, 1, 4]).unwrap();
        let sys = SpacedSystem::pure_powers(5, 2).unwrap();
        let m125 = set.enumerate(125).unwrap().members;
        assert_eq!(mitm_count(&sys, 3, &m125, &opts()).unwrap().exact_u128(), Some(114_561));
        let m60 = set.enumerate(60).unwrap().members;
        let b = brute_force_count(&sys, 3, &m60, &opts()).unwrap();
        let m = mitm_count(&sys, 3, &m60, &opts()).unwrap();
        assert_eq!(b.exact_u128(), Some(27_701));
        assert_eq!(m.count, b.count);
    }

    #[test]
    fn modular_mode_upper_bounds_exact() {
        let set = crate::DigitSet::new(3, [0, 1]).unwrap();
        let members = set.enumerate(40).unwrap().members;
        let sys = pure(2);
        let exact = mitm_count(&sys, 2, &members, &opts()).unwrap().exact_u128().unwrap();
        for modulus in [3u64, 9, 27, 81, 243, 6561] {
            let m = mitm_count(&sys, 2, &members, &CountOptions::modular(modulus)).unwrap();
            let b = brute_force_count(&sys, 2, &members, &CountOptions::modular(modulus)).unwrap();
            assert_eq!(m.count, b.count);
            assert!(m.exact_u128().unwrap() >= exact);
        }
        // 3^8 = 6561 > 2·2·40² so the congruence is an equality.
        let m = mitm_count(&sys, 2, &members, &CountOptions::modular(6561)).unwrap();
        assert_eq!(m.exact_u128(), Some(exact));
    }

    #[test]
    fn bounded_count_matches_brute() {
        let sys = PolySystem::powers(&[2]).unwrap();
        let members = [1u64, 4, 5, 6, 9, 20, 21, 24, 25];
        let o = CountOptions {
            key_bound: Some(625),
            ..Default::default()
        };
        let m = mitm_count(&sys, 2, &members, &o).unwrap();
        let b = brute_force_count(&sys, 2, &members, &o).unwrap();
        assert_eq!(m.count, b.count);
        assert_eq!(m.exact_u128(), Some(101));
    }

    #[test]
    fn weighted_unit_equals_unweighted() {
        let members: Vec<u64> = vec![1, 3, 4, 9, 10, 12, 13];
        let w = WeightAssignment::<BigRational>::unit(&members).unwrap();
        let a = mitm_count_weighted(&pure(2), 3, &members, &w, &opts()).unwrap();
        let b = mitm_count(&pure(2), 3, &members, &opts()).unwrap();
        assert_eq!(a.count, b.count);
    }

    #[test]
    fn weighted_rational_matches_float() {
        let members: Vec<u64> = vec![1, 3, 4, 9, 10, 12];
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let wq = WeightAssignment::new(
            members
                .iter()
                .zip([q(1, 2), q(1, 3), q(1, 1), q(2, 7), q(0, 1), q(5, 6)])
                .map(|(&x, w)| (x, w))
                .collect(),
        )
        .unwrap();
        let wf = WeightAssignment::new(
            members
                .iter()
                .zip([0.5, 1.0 / 3.0, 1.0, 2.0 / 7.0, 0.0, 5.0 / 6.0])
                .map(|(&x, w)| (x, w))
                .collect(),
        )
        .unwrap();
        let a = mitm_count_weighted(&pure(1), 2, &members, &wq, &opts())
            .unwrap()
            .count
            .to_f64();
        let b = mitm_count_weighted(&pure(1), 2, &members, &wf, &opts())
            .unwrap()
            .count
            .to_f64();
        assert!((a - b).abs() <= 1e-9 * a.abs());
        // Direct weighted brute force.
        let ws = [0.5, 1.0 / 3.0, 1.0, 2.0 / 7.0, 0.0, 5.0 / 6.0];
        let mut direct = 0.0;
        for (i1, &x1) in members.iter().enumerate() {
            for (i2, &x2) in members.iter().enumerate() {
                for (j1, &y1) in members.iter().enumerate() {
                    for (j2, &y2) in members.iter().enumerate() {
                        if x1 + x2 == y1 + y2 {
                            direct += ws[i1] * ws[i2] * ws[j1] * ws[j2];
                        }
                    }
                }
            }
        }
        assert!((a - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn brute_budget_refuses() {
        let members: Vec<u64> = (1..=100).collect();
        let o = CountOptions {
            budget: Budget::default().with_tuples(1_000_000),
            ..Default::default()
        };
        assert!(brute_force_count(&pure(1), 3, &members, &o).unwrap_err().is_budget());
    }

    #[test]
    fn lower_bound_examples() {
        assert!((lower_bound_reference(2, 1, 9, 4) - 256.0 / 9.0).abs() < 1e-9);
        assert!((lower_bound_reference(1, 1, 1, 1) - 1.0).abs() < 1e-12);
        assert!((lower_bound_reference(3, 2, 100, 10) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fit_examples() {
        let pts: Vec<FitPoint> = [3u64, 9, 27, 81]
            .iter()
            .map(|&y| FitPoint {
                x: y,
                y,
                count: (y * y) as f64,
            })
            .collect();
        let fit = fit_exponent(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);

        // count = Y^3 + Y^4 with s = 3, t = 2, k = 1.
        let pts: Vec<FitPoint> = [2u64, 4, 8, 16, 32]
            .iter()
            .map(|&y| FitPoint {
                x: y,
                y,
                count: (y.pow(3) + y.pow(4)) as f64,
            })
            .collect();
        let fit = fit_exponent(&pts).unwrap();
        assert!(fit.slope > 3.0 && fit.slope <= 4.0, "{}", fit.slope);

        let flat = vec![FitPoint { x: 1, y: 5, count: 1.0 }; 3];
        assert!(matches!(fit_exponent(&flat), Err(Error::Degenerate(_))));
        assert!(fit_exponent(&pts[..2]).is_err());
    }

    #[test]
    fn histogram_reconstructs_count() {
        let rows = multiplicity_histogram(&pure(1), 2, &E9, &opts()).unwrap();
        let total: BigUint = rows.iter().map(|r| &r.multiplicity * &r.multiplicity).sum();
        assert_eq!(total, BigUint::from(28u32));
        assert!(rows.windows(2).all(|w| w[0].key_hex < w[1].key_hex));
        assert_eq!(rows[0].key_hex.len(), 32);
        assert_eq!(rows[0].values, vec![BigInt::from(2)]);
    }
}
