//! Carries in digit-sum congruences and the modulus-lifting chain.
//!
//! A solution of `Σ x_i ≡ Σ y_i (mod p^d)` over `E^t` is classified by the
//! carries produced when both sides are added digit by digit. Writing `λ_r`
//! for the difference of the carries out of position `r`, the column
//! digit-sum differences are `D_r = λ_r p − λ_{r−1}`, so the digit blocks at
//! position `r` lie in `Ã_t(λ_r p − λ_{r−1})`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::congruence::{grid_average, GRID_LIMIT};
use crate::digit_core::DigitSet;
use crate::error::{Error, Result};
use crate::meanvalue::{PolySystem, SpacedSystem, Spacing};
use crate::scalar::Tally;
use crate::Budget;

/// Calls `f` on every ordered `t`-tuple of indices in `0..n`.
fn for_each_tuple(n: usize, t: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 && t > 0 {
        return;
    }
    let mut idx = vec![0usize; t];
    loop {
        f(&idx);
        let mut pos = t;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn tuple_budget(budget: &Budget, what: &'static str, n: usize, t: usize) -> Result<()> {
    let needed = (n as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
    budget.check_tuples(what, needed)
}

/// The sets `A_t(h)` of digit `t`-tuples with sum `h`, and the sizes of
/// `Ã_t(h)`, the pairs of digit `t`-tuples whose sums differ by `h`.
#[derive(Debug, Clone)]
pub struct CarrySets {
    t: usize,
    digits: Vec<u64>,
    a: BTreeMap<i64, Vec<Vec<u64>>>,
    a_tilde: BTreeMap<i64, u128>,
}

/// Enumerates `A_t(h)` for every reachable `h` and counts `Ã_t(h)` directly
/// over `A_p^{2t}`.
pub fn carry_sets(set: &DigitSet, t: usize, budget: &Budget) -> Result<CarrySets> {
    if t < 2 {
        return Err(Error::param("t must be at least 2"));
    }
    let digits = set.digits().to_vec();
    tuple_budget(budget, "carry sets", digits.len(), 2 * t)?;
    let mut a: BTreeMap<i64, Vec<Vec<u64>>> = BTreeMap::new();
    for_each_tuple(digits.len(), t, |idx| {
        let u: Vec<u64> = idx.iter().map(|&i| digits[i]).collect();
        a.entry(u.iter().sum::<u64>() as i64).or_default().push(u);
    });
    let sums: Vec<i64> = {
        let mut v = Vec::new();
        for_each_tuple(digits.len(), t, |idx| {
            v.push(idx.iter().map(|&i| digits[i] as i64).sum())
        });
        v
    };
    let mut a_tilde: BTreeMap<i64, u128> = BTreeMap::new();
    for &su in &sums {
        for &sv in &sums {
            *a_tilde.entry(su - sv).or_default() += 1;
        }
    }
    Ok(CarrySets { t, digits, a, a_tilde })
}

impl CarrySets {
    pub fn t(&self) -> usize {
        self.t
    }

    /// `A_t(h)`; empty outside the reachable range.
    pub fn a(&self, h: i64) -> &[Vec<u64>] {
        self.a.get(&h).map_or(&[], |v| v.as_slice())
    }

    /// `#Ã_t(h)`, counted directly.
    pub fn a_tilde_size(&self, h: i64) -> u128 {
        self.a_tilde.get(&h).copied().unwrap_or(0)
    }

    /// `Σ_m #A_t(m) · #A_t(m − h)`.
    pub fn a_tilde_convolution(&self, h: i64) -> u128 {
        self.a
            .iter()
            .map(|(&m, v)| v.len() as u128 * self.a(m - h).len() as u128)
            .sum()
    }

    /// The reachable values of `h` for `Ã_t`.
    pub fn a_tilde_range(&self) -> impl Iterator<Item = i64> + '_ {
        self.a_tilde.keys().copied()
    }

    /// The elements of `Ã_t(h)`.
    pub fn a_tilde(&self, h: i64) -> Vec<(Vec<u64>, Vec<u64>)> {
        let mut out = Vec::new();
        for (&m, us) in &self.a {
            for u in us {
                for v in self.a(m - h) {
                    out.push((u.clone(), v.clone()));
                }
            }
        }
        out
    }

    /// Largest `#A_t(n)`.
    pub fn max_a(&self) -> usize {
        self.a.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }
}

/// A carry tuple `λ` with `λ′_r = λ_r p − λ_{r−1}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CarryTuple(pub Vec<i64>);

impl CarryTuple {
    pub fn derived(&self, p: u64) -> Vec<i64> {
        let p = p as i64;
        let mut prev = 0;
        self.0
            .iter()
            .map(|&l| {
                let v = l * p - prev;
                prev = l;
                v
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }
}

impl std::fmt::Display for CarryTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn check_support<T>(set: &DigitSet, weights: &[(u64, T)]) -> Result<()> {
    match weights.iter().find(|(x, _)| !set.is_member(*x)) {
        Some((x, _)) => Err(Error::param(format!("{x} is not a member of {set}"))),
        None => Ok(()),
    }
}

fn tuple_weight<T: Tally>(weights: &[(u64, T)], idx: &[usize]) -> T {
    idx.iter().fold(T::from_u128(1), |acc, &i| acc.mul(&weights[i].1))
}

/// `G_d(𝔟)` by counting, with the grid average when the grid is small
/// enough to check against.
#[derive(Debug, Clone, PartialEq)]
pub struct GdValue<T> {
    pub count: T,
    pub grid: Option<f64>,
}

impl<T: Tally> GdValue<T> {
    /// The (real) value of the count.
    pub fn value(&self) -> f64 {
        self.count.to_c64().re
    }
}

/// `G_d(𝔟) = Σ 𝔟_x conj(𝔟_y)` over `(x, y) ∈ E^t × E^t` with
/// `Σ x_i ≡ Σ y_i (mod p^d)`, where `𝔟_x = ∏ 𝔟_{x_i}`.
///
/// The count and, when `p^d ≤` [`GRID_LIMIT`], the grid average
/// `∮_{p^d} |Σ_x 𝔟_x e(βx)|^{2t}` are both computed; disagreement beyond
/// `10⁻⁹` relative, or an imaginary part beyond `10⁻¹²` of the magnitude,
/// is reported as an invariant violation.
pub fn g_d<T: Tally>(set: &DigitSet, t: usize, d: u32, weights: &[(u64, T)], budget: &Budget) -> Result<GdValue<T>> {
    if d == 0 || t == 0 {
        return Err(Error::param("need d ≥ 1 and t ≥ 1"));
    }
    check_support(set, weights)?;
    let m = set.modulus(d)?;
    tuple_budget(budget, "G_d tuples", weights.len(), t)?;
    let mut classes: BTreeMap<u64, T> = BTreeMap::new();
    for_each_tuple(weights.len(), t, |idx| {
        let sum = idx.iter().fold(0u64, |acc, &i| (acc + weights[i].0 % m) % m);
        classes
            .entry(sum)
            .or_insert_with(T::zero)
            .add_assign(&tuple_weight(weights, idx));
    });
    let mut count = T::zero();
    for v in classes.values() {
        count.add_assign(&v.abs_sq());
    }
    let c = count.to_c64();
    if c.im.abs() > 1e-12 * c.norm().max(1e-300) {
        return Err(Error::Invariant(format!("G_d has imaginary part {}", c.im)));
    }
    let grid = if m <= GRID_LIMIT {
        let coeffs: Vec<(u64, Complex64)> = weights.iter().map(|(x, w)| (x % m, w.to_c64())).collect();
        let g = grid_average(m, 1, |u| {
            let f: Complex64 = coeffs
                .iter()
                .map(|&(x, w)| {
                    let n = (x as u128 * u[0] as u128 % m as u128) as f64;
                    w * Complex64::from_polar(1.0, std::f64::consts::TAU * n / m as f64)
                })
                .sum();
            f.norm_sqr().powi(t as i32)
        })?;
        if (g - c.re).abs() > 1e-9 * c.re.abs().max(g.abs()).max(1.0) {
            return Err(Error::Invariant(format!("G_d grid {g} differs from count {}", c.re)));
        }
        Some(g)
    } else {
        None
    };
    Ok(GdValue { count, grid })
}

/// `G_d` split by carry tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct CarryDecomposition<T> {
    pub d: u32,
    pub t: usize,
    pub entries: BTreeMap<CarryTuple, T>,
    pub total: T,
}

impl<T: Tally> CarryDecomposition<T> {
    pub fn get(&self, lambda: &[i64]) -> Option<&T> {
        self.entries.get(&CarryTuple(lambda.to_vec()))
    }
}

/// Carries out of each position when adding columns with digit sums `s`.
fn carry_out(s: &[i64], p: i64) -> (Vec<i64>, Vec<i64>) {
    let mut carry = 0;
    let mut digits = Vec::with_capacity(s.len());
    let mut carries = Vec::with_capacity(s.len());
    for &col in s {
        let v = col + carry;
        digits.push(v % p);
        carry = v / p;
        carries.push(carry);
    }
    (digits, carries)
}

/// Assigns every solution counted by [`g_d`] to its carry tuple.
///
/// Tuples are grouped by their column digit-sum vectors `S(x)`; a pair
/// `(S, S′)` is a solution iff the low `d` digits of both sums agree, and
/// then `λ_r` is the difference of the carries out of position `r`. Each
/// classification is checked against `S_r − S′_r = λ_r p − λ_{r−1}` and
/// `|λ_r| ≤ t − 1`.
pub fn carry_decomposition<T: Tally>(
    set: &DigitSet,
    t: usize,
    d: u32,
    weights: &[(u64, T)],
    budget: &Budget,
) -> Result<CarryDecomposition<T>> {
    if d == 0 || t == 0 {
        return Err(Error::param("need d ≥ 1 and t ≥ 1"));
    }
    check_support(set, weights)?;
    let tuples = ((2 * t - 1) as u128).checked_pow(d).unwrap_or(u128::MAX);
    budget.check_tuples("carry tuples", tuples)?;
    tuple_budget(budget, "carry decomposition tuples", weights.len(), t)?;
    let p = set.base() as i64;
    let digits: Vec<Vec<u64>> = weights.iter().map(|(x, _)| set.low_digits(*x, d as usize)).collect();

    let mut by_sums: BTreeMap<Vec<i64>, T> = BTreeMap::new();
    for_each_tuple(weights.len(), t, |idx| {
        let s: Vec<i64> = (0..d as usize)
            .map(|r| idx.iter().map(|&i| digits[i][r] as i64).sum())
            .collect();
        by_sums
            .entry(s)
            .or_insert_with(T::zero)
            .add_assign(&tuple_weight(weights, idx));
    });
    let groups: Vec<_> = by_sums
        .into_iter()
        .map(|(s, w)| {
            let (low, carries) = carry_out(&s, p);
            (s, w, low, carries)
        })
        .collect();

    let parts: Vec<Result<BTreeMap<CarryTuple, T>>> = groups
        .par_iter()
        .map(|(sx, wx, lx, cx)| {
            let mut local: BTreeMap<CarryTuple, T> = BTreeMap::new();
            for (sy, wy, ly, cy) in &groups {
                if lx != ly {
                    continue;
                }
                let lambda = CarryTuple(cx.iter().zip(cy).map(|(a, b)| a - b).collect());
                let derived = lambda.derived(p as u64);
                let ok = lambda.0.iter().all(|l| l.unsigned_abs() < t as u64)
                    && sx.iter().zip(sy).zip(&derived).all(|((a, b), dv)| a - b == *dv);
                if !ok {
                    return Err(Error::Invariant(format!(
                        "digit sums {sx:?} and {sy:?} do not match carry tuple {lambda}"
                    )));
                }
                local
                    .entry(lambda)
                    .or_insert_with(T::zero)
                    .add_assign(&wx.mul(&wy.conj()));
            }
            Ok(local)
        })
        .collect();

    let mut entries: BTreeMap<CarryTuple, T> = BTreeMap::new();
    for part in parts {
        for (lambda, v) in part? {
            entries.entry(lambda).or_insert_with(T::zero).add_assign(&v);
        }
    }
    let mut total = T::zero();
    for v in entries.values() {
        total.add_assign(v);
    }
    Ok(CarryDecomposition { d, t, entries, total })
}

/// All pairs `(x, y) ∈ members^t × members^t` with
/// `Σ φ_j(x_i) ≡ Σ φ_j(y_i) (mod m)` for every `j`.
pub fn solutions_mod(
    system: &PolySystem,
    members: &[u64],
    t: usize,
    modulus: u64,
    budget: &Budget,
) -> Result<Vec<(Vec<u64>, Vec<u64>)>> {
    if modulus < 2 {
        return Err(Error::param("modulus must be at least 2"));
    }
    tuple_budget(budget, "solution tuples", members.len(), t)?;
    let mut groups: BTreeMap<Vec<u64>, Vec<Vec<u64>>> = BTreeMap::new();
    let vals: Vec<Vec<u64>> = members
        .iter()
        .map(|&x| system.polys().iter().map(|p| p.eval_mod(x, modulus)).collect())
        .collect();
    for_each_tuple(members.len(), t, |idx| {
        let key: Vec<u64> = (0..system.k())
            .map(|j| {
                idx.iter().fold(0u64, |acc, &i| {
                    ((acc as u128 + vals[i][j] as u128) % modulus as u128) as u64
                })
            })
            .collect();
        groups
            .entry(key)
            .or_default()
            .push(idx.iter().map(|&i| members[i]).collect());
    });
    let pairs: u128 = groups.values().map(|g| (g.len() as u128).pow(2)).sum();
    budget.check_tuples("solution pairs", pairs)?;
    let mut out = Vec::with_capacity(pairs as usize);
    for g in groups.values() {
        for x in g {
            for y in g {
                out.push((x.clone(), y.clone()));
            }
        }
    }
    Ok(out)
}

/// One implication of the chain: from `x ≡ y` componentwise mod
/// `p^{c_{j−1}}` (no condition for `j = 1`) to `Σx ≡ Σy (mod p^{c_j})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub j: u32,
    pub c_j: u32,
    /// Solutions satisfying the premise.
    pub premises: usize,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftingChain {
    pub c: u32,
    pub b: u32,
    /// First `j` with `c_j = B`.
    pub j_star: u32,
    pub steps: Vec<ChainStep>,
}

/// Verifies the chain `c_j = min(jc, B)` for `φ(z) = z + p^c ψ(z)` on the
/// given solutions of `Σ φ(x_i) ≡ Σ φ(y_i) (mod p^B)`.
///
/// A pure system `φ(z) = z` behaves as `c = B`. A violated implication is an
/// [`Error::Invariant`] carrying the counterexample.
pub fn lifting_chain(system: &SpacedSystem, b: u32, pairs: &[(Vec<u64>, Vec<u64>)]) -> Result<LiftingChain> {
    if system.k() != 1 {
        return Err(Error::param("lifting chain needs a single polynomial"));
    }
    if b == 0 {
        return Err(Error::param("B must be at least 1"));
    }
    let p = system.base();
    let c = match system.spacing() {
        Spacing::Exponent(c) if c >= 1 => c,
        Spacing::Exponent(_) => return Err(Error::param("spacing exponent must be at least 1")),
        Spacing::Pure => b,
    };
    let pow = |e: u32| -> Result<u64> {
        p.checked_pow(e)
            .ok_or_else(|| Error::param(format!("{p}^{e} does not fit in 64 bits")))
    };
    let big = pow(b)?;
    let phi = &system.polys()[0];
    let sum_mod = |v: &[u64], m: u64, f: &dyn Fn(u64) -> u64| -> u64 {
        v.iter().fold(0u128, |acc, &x| (acc + f(x) as u128) % m as u128) as u64
    };
    for (x, y) in pairs {
        if x.len() != y.len() {
            return Err(Error::param("solution sides differ in length"));
        }
        let f = |z: u64| phi.eval_mod(z, big);
        if sum_mod(x, big, &f) != sum_mod(y, big, &f) {
            return Err(Error::param(format!("{x:?}, {y:?} is not a solution mod {p}^{b}")));
        }
    }
    let c_of = |j: u32| j.saturating_mul(c).min(b);
    let j_star = (1..=b).find(|&j| c_of(j) == b).unwrap_or(b);
    let mut steps = Vec::new();
    for j in 1..=j_star {
        let target = pow(c_of(j))?;
        let premise = if j == 1 { 1 } else { pow(c_of(j - 1))? };
        let mut premises = 0;
        for (x, y) in pairs {
            if x.iter().zip(y).any(|(a, b)| a % premise != b % premise) {
                continue;
            }
            premises += 1;
            let id = |z: u64| z % target;
            if sum_mod(x, target, &id) != sum_mod(y, target, &id) {
                return Err(Error::Invariant(format!(
                    "step {j}: {x:?}, {y:?} agree mod {p}^{} but their sums differ mod {p}^{}",
                    if j == 1 { 0 } else { c_of(j - 1) },
                    c_of(j)
                )));
            }
        }
        steps.push(ChainStep {
            j,
            c_j: c_of(j),
            premises,
            verified: true,
        });
    }
    Ok(LiftingChain { c, b, j_star, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanvalue::Poly;
    use num_rational::BigRational;

    fn binary() -> DigitSet {
        DigitSet::new(3, [0, 1]).unwrap()
    }

    fn unit(members: &[u64]) -> Vec<(u64, BigRational)> {
        members
            .iter()
            .map(|&x| (x, BigRational::from_integer(1.into())))
            .collect()
    }

    #[test]
    fn carry_set_examples() {
        let cs = carry_sets(&binary(), 2, &Budget::default()).unwrap();
        assert_eq!(cs.a(0), &[vec![0, 0]]);
        assert_eq!(cs.a(1), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(cs.a(2), &[vec![1, 1]]);
        assert!(cs.a(3).is_empty() && cs.a(-1).is_empty());
        assert_eq!(cs.a_tilde_size(0), 6);
        assert_eq!(cs.a_tilde_size(3), 0);
        assert_eq!(cs.a_tilde(0).len(), 6);
        for h in -3..=3 {
            assert_eq!(cs.a_tilde_size(h), cs.a_tilde_convolution(h));
        }
        assert!(carry_sets(&binary(), 1, &Budget::default()).is_err());
    }

    #[test]
    fn derived_tuple() {
        assert_eq!(CarryTuple(vec![1, -1, 0]).derived(3), vec![3, -4, 1]);
        assert_eq!(CarryTuple(vec![0, 1]).to_string(), "(0,1)");
    }

    #[test]
    fn g_d_golden() {
        let g = g_d(&binary(), 2, 1, &unit(&[1, 3, 4]), &Budget::default()).unwrap();
        assert_eq!(g.count, BigRational::from_integer(33.into()));
        assert!((g.grid.unwrap() - 33.0).abs() < 1e-9);
        let zero: Vec<(u64, f64)> = vec![(1, 0.0), (3, 0.0)];
        assert_eq!(g_d(&binary(), 2, 2, &zero, &Budget::default()).unwrap().count, 0.0);
    }

    #[test]
    fn g_d_large_modulus_is_equality() {
        // 3^3 > 2·2·4: the congruence is an equation, counted by sums.
        let g = g_d(&binary(), 2, 3, &unit(&[1, 3, 4]), &Budget::default()).unwrap();
        let mut direct = 0;
        for a in [1, 3, 4] {
            for b in [1, 3, 4] {
                for c in [1, 3, 4] {
                    for d in [1, 3, 4] {
                        if a + b == c + d {
                            direct += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(g.count, BigRational::from_integer(direct.into()));
    }

    #[test]
    fn g_d_complex_weights_are_real() {
        let w: Vec<(u64, Complex64)> = [1u64, 3, 4, 9]
            .iter()
            .map(|&x| (x, Complex64::from_polar(0.5, x as f64 * 0.7)))
            .collect();
        let g = g_d(&binary(), 2, 2, &w, &Budget::default()).unwrap();
        assert!(g.value() >= 0.0);
        let dec = carry_decomposition(&binary(), 2, 2, &w, &Budget::default()).unwrap();
        assert!((dec.total - g.count).norm() < 1e-12);
    }

    #[test]
    fn decomposition_golden() {
        let dec = carry_decomposition(&binary(), 2, 2, &unit(&[1, 3, 4, 9]), &Budget::default()).unwrap();
        assert_eq!(dec.entries.len(), 1);
        assert_eq!(dec.get(&[0, 0]), Some(&BigRational::from_integer(36.into())));
        let g = g_d(&binary(), 2, 2, &unit(&[1, 3, 4, 9]), &Budget::default()).unwrap();
        assert_eq!(dec.total, g.count);
    }

    /// Per-pair oracle: carries from dividing partial sums.
    fn oracle(set: &DigitSet, t: usize, d: u32, members: &[u64]) -> BTreeMap<Vec<i64>, u64> {
        let p = set.base() as i64;
        let m = p.pow(d);
        let mut out = BTreeMap::new();
        for_each_tuple(members.len(), t, |ix| {
            for_each_tuple(members.len(), t, |iy| {
                let sx: i64 = ix.iter().map(|&i| members[i] as i64).sum();
                let sy: i64 = iy.iter().map(|&i| members[i] as i64).sum();
                if (sx - sy) % m != 0 {
                    return;
                }
                let lambda: Vec<i64> = (0..d)
                    .map(|r| {
                        let low = p.pow(r + 1);
                        let part = |ids: &[usize]| -> i64 { ids.iter().map(|&i| members[i] as i64 % low).sum() };
                        (part(ix) - part(iy)) / low
                    })
                    .collect();
                *out.entry(lambda).or_insert(0) += 1;
            });
        });
        out
    }

    #[test]
    fn decomposition_matches_pair_oracle() {
        let set = DigitSet::new(5, [0, 1, 4]).unwrap();
        let members = set.enumerate(130).unwrap().members;
        for d in 1..=3 {
            let dec = carry_decomposition(&set, 2, d, &unit(&members), &Budget::default()).unwrap();
            let expect = oracle(&set, 2, d, &members);
            assert_eq!(dec.entries.len(), expect.len());
            for (l, n) in expect {
                assert_eq!(dec.get(&l), Some(&BigRational::from_integer(n.into())), "d={d} λ={l:?}");
            }
        }
    }

    #[test]
    fn single_digit_carry() {
        // 1 + 4 = 5 against 5 + 5 = 10: first-digit sums 5 and 0 differ by p.
        let set = DigitSet::new(5, [0, 1, 4]).unwrap();
        let dec = carry_decomposition(&set, 2, 1, &unit(&[1, 4, 5]), &Budget::default()).unwrap();
        assert!(dec.get(&[1]).is_some() && dec.get(&[-1]).is_some());
        assert_eq!(dec.get(&[1]), dec.get(&[-1]));
        assert!(dec.entries.keys().all(|l| l.0[0].abs() <= 1));
        let g = g_d(&set, 2, 1, &unit(&[1, 4, 5]), &Budget::default()).unwrap();
        assert_eq!(dec.total, g.count);
    }

    #[test]
    fn chain_golden() {
        let set = binary();
        let members = set.enumerate(27).unwrap().members;
        let sys = SpacedSystem::linear(3, 1, &Poly::monomial(2)).unwrap();
        let pairs = solutions_mod(&sys, &members, 2, 27, &Budget::default()).unwrap();
        let chain = lifting_chain(&sys, 3, &pairs).unwrap();
        assert_eq!(chain.j_star, 3);
        assert_eq!(chain.steps.iter().map(|s| s.c_j).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(chain.steps.iter().all(|s| s.verified));
        assert_eq!(chain.steps[0].premises, pairs.len());
    }

    #[test]
    fn chain_short_cases() {
        let members = binary().enumerate(27).unwrap().members;
        let sys = SpacedSystem::linear(3, 4, &Poly::monomial(2)).unwrap();
        let pairs = solutions_mod(&sys, &members, 2, 27, &Budget::default()).unwrap();
        assert_eq!(lifting_chain(&sys, 3, &pairs).unwrap().j_star, 1);
        let id = SpacedSystem::pure_powers(3, 1).unwrap();
        let pairs = solutions_mod(&id, &members, 2, 27, &Budget::default()).unwrap();
        assert_eq!(lifting_chain(&id, 3, &pairs).unwrap().j_star, 1);
        let bad = vec![(vec![1, 3], vec![1, 4])];
        assert!(lifting_chain(&id, 3, &bad).is_err());
    }
}
