//! Digit sets, ellipsephic enumeration, and representation profiles.
//!
//! An ellipsephic set `E = E_p^A` is the set of positive integers whose
//! base-`p` expansion uses only digits from `A_p = A ∩ [0, p-1]`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::{is_prime, stats, Budget};

/// A prime base together with its permitted digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitSet {
    base: u64,
    digits: Vec<u64>,
    strict: bool,
}

impl DigitSet {
    /// Builds a digit set in strict mode, which requires `2 ≤ #digits ≤ p-1`.
    pub fn new(base: u64, digits: impl IntoIterator<Item = u64>) -> Result<Self> {
        Self::with_mode(base, digits, true)
    }

    pub fn with_mode(base: u64, digits: impl IntoIterator<Item = u64>, strict: bool) -> Result<Self> {
        if base < 3 || !is_prime(base) {
            return Err(Error::BaseNotOddPrime(base));
        }
        let mut digits: Vec<u64> = digits.into_iter().collect();
        if let Some(&digit) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::DigitOutOfRange { digit, base });
        }
        digits.sort_unstable();
        if digits.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DigitsNotDistinct(digits));
        }
        if strict {
            if digits.len() == 1 {
                return Err(Error::SingleDigit);
            }
            if digits.len() < 2 || digits.len() as u64 > base - 1 {
                return Err(Error::Cardinality {
                    count: digits.len(),
                    max: base - 1,
                });
            }
        }
        Ok(DigitSet { base, digits, strict })
    }

    /// All digits `0..p`; the unrestricted case, only valid outside strict mode.
    pub fn full(base: u64) -> Result<Self> {
        Self::with_mode(base, 0..base, false)
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn strict(&self) -> bool {
        self.strict
    }

    /// `r = #A_p`.
    pub fn r(&self) -> usize {
        self.digits.len()
    }

    pub fn contains_digit(&self, d: u64) -> bool {
        self.digits.binary_search(&d).is_ok()
    }

    /// True iff every base-`p` digit of `n` is permitted.
    pub fn is_member(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        let mut m = n;
        while m > 0 {
            if !self.contains_digit(m % self.base) {
                return false;
            }
            m /= self.base;
        }
        true
    }

    /// The lowest `len` base-`p` digits of `n`, least significant first.
    pub fn low_digits(&self, n: u64, len: usize) -> Vec<u64> {
        let mut m = n;
        (0..len)
            .map(|_| {
                let d = m % self.base;
                m /= self.base;
                d
            })
            .collect()
    }

    /// `p^e`, or `None` when it does not fit in 64 bits.
    pub fn power(&self, e: u32) -> Option<u64> {
        self.base.checked_pow(e)
    }

    /// `p^e` as a checked parameter.
    pub(crate) fn modulus(&self, e: u32) -> Result<u64> {
        self.power(e)
            .ok_or_else(|| Error::param(format!("{}^{e} does not fit in 64 bits", self.base)))
    }

    /// The sorted members of `E ∩ [1, x]`.
    pub fn enumerate(&self, x: u64) -> Result<EllipsephicEnumeration> {
        enumerate(self, x)
    }

    /// `#E(X)` by a digit-by-digit count against the expansion of `X`.
    pub fn count_members(&self, x: u64) -> Result<u64> {
        count_members(self, x)
    }
}

impl fmt::Display for DigitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits: Vec<String> = self.digits.iter().map(u64::to_string).collect();
        write!(f, "p={};digits={}", self.base, digits.join(","))?;
        if !self.strict {
            write!(f, ";strict=off")?;
        }
        Ok(())
    }
}

impl FromStr for DigitSet {
    type Err = Error;

    /// Parses `p=11;digits=0,1,4,9`, optionally followed by `;strict=off`.
    fn from_str(s: &str) -> Result<Self> {
        if s.chars().any(char::is_whitespace) {
            return Err(Error::Parse(format!("digit set text must not contain spaces: {s:?}")));
        }
        let mut base = None;
        let mut digits = None;
        let mut strict = true;
        for part in s.split(';') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
            match key {
                "p" => {
                    base = Some(
                        value
                            .parse::<u64>()
                            .map_err(|_| Error::Parse(format!("base must be a positive integer, got {value:?}")))?,
                    )
                }
                "digits" => {
                    let list = if value.is_empty() {
                        Vec::new()
                    } else {
                        value
                            .split(',')
                            .map(|d| d.parse::<u64>().map_err(|_| Error::Parse(format!("bad digit {d:?}"))))
                            .collect::<Result<Vec<_>>>()?
                    };
                    digits = Some(list);
                }
                "strict" => {
                    strict = match value {
                        "on" | "true" | "1" => true,
                        "off" | "false" | "0" => false,
                        _ => return Err(Error::Parse(format!("bad strict flag {value:?}"))),
                    }
                }
                _ => return Err(Error::Parse(format!("unknown key {key:?}"))),
            }
        }
        let base = base.ok_or_else(|| Error::Parse("missing key p".into()))?;
        let digits = digits.ok_or_else(|| Error::Parse("missing key digits".into()))?;
        DigitSet::with_mode(base, digits, strict)
    }
}

/// The members of `E(X) = E ∩ [1, X]`, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EllipsephicEnumeration {
    pub digit_set: DigitSet,
    pub bound: u64,
    pub members: Vec<u64>,
}

impl EllipsephicEnumeration {
    /// `Y = #E(X)`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The digit-string bound on `#E(X)`: `r^L` with `L = ⌊log_p X⌋ + 1`
    /// when 0 is a digit (shorter strings are padded with zeros), and
    /// `r + r² + … + r^L` otherwise.
    pub fn size_bound(&self) -> u128 {
        let len = digit_len(self.bound, self.digit_set.base());
        let r = self.digit_set.r() as u128;
        if self.digit_set.contains_digit(0) {
            r.saturating_pow(len)
        } else {
            (1..=len).fold(0u128, |acc, l| acc.saturating_add(r.saturating_pow(l)))
        }
    }
}

fn digit_len(x: u64, base: u64) -> u32 {
    let mut len = 0;
    let mut m = x;
    while m > 0 {
        len += 1;
        m /= base;
    }
    len
}

/// Generates digit strings most-significant-first in increasing digit order,
/// one length at a time, so members come out sorted without a sort pass.
pub fn enumerate(digit_set: &DigitSet, x: u64) -> Result<EllipsephicEnumeration> {
    if x == 0 {
        return Err(Error::param("enumeration bound X must be at least 1"));
    }
    let p = digit_set.base() as u128;
    let bound = x as u128;
    let mut members = Vec::new();

    fn extend(digits: &[u64], p: u128, bound: u128, prefix: u128, remaining: u32, out: &mut Vec<u64>) {
        if remaining == 0 {
            if prefix <= bound {
                out.push(prefix as u64);
            }
            return;
        }
        let scale = p.pow(remaining - 1);
        for &d in digits {
            let next = prefix * p + d as u128;
            if next * scale > bound {
                break;
            }
            extend(digits, p, bound, next, remaining - 1, out);
        }
    }

    for len in 1..=digit_len(x, digit_set.base()) {
        let scale = p.pow(len - 1);
        for &lead in digit_set.digits().iter().filter(|&&d| d != 0) {
            if lead as u128 * scale > bound {
                break;
            }
            extend(digit_set.digits(), p, bound, lead as u128, len - 1, &mut members);
        }
    }

    Ok(EllipsephicEnumeration {
        digit_set: digit_set.clone(),
        bound: x,
        members,
    })
}

pub fn is_member(digit_set: &DigitSet, n: u64) -> bool {
    digit_set.is_member(n)
}

/// Counts `E ∩ [1, X]` without materialising it.
pub fn count_members(digit_set: &DigitSet, x: u64) -> Result<u64> {
    if x == 0 {
        return Err(Error::param("enumeration bound X must be at least 1"));
    }
    let p = digit_set.base();
    let r = digit_set.r() as u128;
    let nonzero = digit_set.digits().iter().filter(|&&d| d != 0).count() as u128;
    let top = digit_set.low_digits(x, digit_len(x, p) as usize);
    let len = top.len();

    // Strings shorter than X: a nonzero leading digit, then anything.
    let mut total: u128 = (1..len).map(|l| nonzero * r.pow(l as u32 - 1)).sum();

    // Strings of the same length, walking X's digits from the top.
    let mut tight = true;
    for (pos, &xd) in top.iter().rev().enumerate() {
        let rest = r.pow((len - 1 - pos) as u32);
        let below = digit_set
            .digits()
            .iter()
            .filter(|&&d| d < xd && (pos > 0 || d != 0))
            .count() as u128;
        total += below * rest;
        if !digit_set.contains_digit(xd) || (pos == 0 && xd == 0) {
            tight = false;
            break;
        }
    }
    if tight {
        total += 1;
    }
    Ok(total as u64)
}

/// The infinite set `A` that the digit set is cut from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DigitSource {
    Explicit(Vec<u64>),
    Squares,
    /// `{0, 1, 2^k, 3^k, ...}`.
    Powers(u32),
}

impl DigitSource {
    pub fn explicit(values: Vec<u64>) -> Result<Self> {
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("explicit source must be strictly increasing"));
        }
        if values.first().is_some_and(|&v| v > 1) {
            return Err(Error::param("explicit source must start at 0 or 1"));
        }
        Ok(DigitSource::Explicit(values))
    }

    /// All elements `≤ n`, increasing.
    pub fn elements_up_to(&self, n: u64) -> Vec<u64> {
        match self {
            DigitSource::Explicit(v) => v.iter().copied().take_while(|&a| a <= n).collect(),
            DigitSource::Squares => DigitSource::Powers(2).elements_up_to(n),
            DigitSource::Powers(k) => {
                let mut out = Vec::new();
                for base in 0u64.. {
                    match base.checked_pow(*k) {
                        Some(v) if v <= n => {
                            if out.last() != Some(&v) {
                                out.push(v);
                            }
                        }
                        _ => break,
                    }
                    if *k == 0 {
                        break;
                    }
                }
                out
            }
        }
    }

    /// The digit set `A ∩ [0, p-1]` over base `p`.
    pub fn digit_set(&self, base: u64, strict: bool) -> Result<DigitSet> {
        DigitSet::with_mode(base, self.elements_up_to(base - 1), strict)
    }
}

impl fmt::Display for DigitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigitSource::Explicit(v) => {
                let s: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "explicit:{}", s.join(","))
            }
            DigitSource::Squares => write!(f, "squares"),
            DigitSource::Powers(k) => write!(f, "powers:{k}"),
        }
    }
}

impl FromStr for DigitSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "squares" {
            return Ok(DigitSource::Squares);
        }
        if let Some(k) = s.strip_prefix("powers:") {
            let k: u32 = k.parse().map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            if k == 0 {
                return Err(Error::param("power source needs exponent ≥ 1"));
            }
            return Ok(DigitSource::Powers(k));
        }
        if let Some(list) = s.strip_prefix("explicit:") {
            let values = list
                .split(',')
                .map(|v| v.parse::<u64>().map_err(|_| Error::Parse(format!("bad element {v:?}"))))
                .collect::<Result<Vec<_>>>()?;
            return DigitSource::explicit(values);
        }
        Err(Error::Parse(format!("unknown digit source {s:?}")))
    }
}

/// Representation counts `n ↦ #{(a_1..a_t) ∈ A^t : Σa_i = n}` for `n ≤ N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepProfile {
    pub t: u32,
    pub horizon: u64,
    counts: ProfileCounts,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum ProfileCounts {
    Word(Vec<u64>),
    Big(Vec<BigUint>),
}

impl RepProfile {
    pub fn count(&self, n: u64) -> BigUint {
        match &self.counts {
            ProfileCounts::Word(v) => BigUint::from(v[n as usize]),
            ProfileCounts::Big(v) => v[n as usize].clone(),
        }
    }

    pub fn count_u64(&self, n: u64) -> Option<u64> {
        match &self.counts {
            ProfileCounts::Word(v) => v.get(n as usize).copied(),
            ProfileCounts::Big(v) => v.get(n as usize).and_then(ToPrimitive::to_u64),
        }
    }

    /// Whether the fixed-width path overflowed and counts were recomputed
    /// in arbitrary precision.
    pub fn escalated(&self) -> bool {
        matches!(self.counts, ProfileCounts::Big(_))
    }

    /// `(argmax, max)`; the smallest `n` attaining the maximum.
    pub fn max(&self) -> (u64, BigUint) {
        let mut best = (0, BigUint::zero());
        for n in 0..=self.horizon {
            let c = self.count(n);
            if c > best.1 {
                best = (n, c);
            }
        }
        best
    }

    pub fn total(&self) -> BigUint {
        (0..=self.horizon).map(|n| self.count(n)).sum()
    }
}

/// Exact ordered-tuple representation counts up to `horizon`.
pub fn rep_profile(source: &DigitSource, t: u32, horizon: u64, budget: &Budget) -> Result<RepProfile> {
    if t < 2 {
        return Err(Error::param("rep_profile needs t ≥ 2"));
    }
    let slots = horizon as u128 + 1;
    budget.check_memory("representation profile", slots * 16)?;
    let elems = source.elements_up_to(horizon);
    let counts = match convolve_word(&elems, t, horizon) {
        Some(v) => ProfileCounts::Word(v),
        None => {
            log::info!("representation counts overflowed u64; recomputing in arbitrary precision");
            ProfileCounts::Big(convolve_big(&elems, t, horizon))
        }
    };
    Ok(RepProfile { t, horizon, counts })
}

fn convolve_word(elems: &[u64], t: u32, horizon: u64) -> Option<Vec<u64>> {
    let mut cur = vec![0u64; horizon as usize + 1];
    for &a in elems {
        cur[a as usize] = 1;
    }
    for _ in 1..t {
        let mut next = vec![0u64; cur.len()];
        for (n, &c) in cur.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &a in elems {
                let m = n + a as usize;
                if m > horizon as usize {
                    break;
                }
                next[m] = next[m].checked_add(c)?;
            }
        }
        cur = next;
    }
    Some(cur)
}

fn convolve_big(elems: &[u64], t: u32, horizon: u64) -> Vec<BigUint> {
    let mut cur = vec![BigUint::zero(); horizon as usize + 1];
    for &a in elems {
        cur[a as usize] = BigUint::from(1u32);
    }
    for _ in 1..t {
        let mut next = vec![BigUint::zero(); cur.len()];
        for (n, c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &a in elems {
                let m = n + a as usize;
                if m > horizon as usize {
                    break;
                }
                next[m] += c;
            }
        }
        cur = next;
    }
    cur
}

/// Maximum representation count within `[2^j, 2^(j+1)) ∩ [1, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub j: u32,
    pub start: u64,
    pub end: u64,
    pub max: BigUint,
}

/// Growth summary of a representation profile.
#[derive(Debug, Clone, PartialEq)]
pub struct EtStarReport {
    pub t: u32,
    pub horizon: u64,
    pub argmax: u64,
    pub max_count: BigUint,
    pub windows: Vec<Window>,
    /// Least-squares slope of `ln(window max)` against `ln(window start)`
    /// over windows with a positive maximum; `None` with fewer than two.
    pub slope: Option<f64>,
}

/// Summarises how fast the representation counts grow. A slope near zero is
/// consistent with `E_t*`; no verdict is attached since the property is
/// asymptotic.
pub fn et_star_report(profile: &RepProfile) -> Result<EtStarReport> {
    if profile.horizon < 16 {
        return Err(Error::param("et_star_report needs horizon ≥ 16"));
    }
    let (argmax, max_count) = profile.max();
    let mut windows = Vec::new();
    let mut j = 0u32;
    while let Some(start) = 1u64.checked_shl(j).filter(|&s| s <= profile.horizon) {
        let end = start.saturating_mul(2).saturating_sub(1).min(profile.horizon);
        let max = (start..=end).map(|n| profile.count(n)).max().unwrap_or_default();
        windows.push(Window { j, start, end, max });
        j += 1;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = windows
        .iter()
        .filter(|w| !w.max.is_zero())
        .map(|w| ((w.start as f64).ln(), w.max.to_f64().unwrap_or(f64::INFINITY).ln()))
        .unzip();
    let slope = stats::least_squares(&xs, &ys).map(|(m, _, _)| m);
    Ok(EtStarReport {
        t: profile.t,
        horizon: profile.horizon,
        argmax,
        max_count,
        windows,
        slope,
    })
}
