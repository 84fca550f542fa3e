use std::fmt;
use std::ops::Deref;

use num_bigint::BigInt;

use crate::error::{Error, Result};

/// An integer polynomial, `coeffs[i]` being the coefficient of `z^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<i64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn monomial(degree: u32) -> Self {
        let mut coeffs = vec![0; degree as usize + 1];
        coeffs[degree as usize] = 1;
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval_i128(&self, x: u64) -> Option<i128> {
        let x = x as i128;
        self.coeffs
            .iter()
            .rev()
            .try_fold(0i128, |acc, &c| acc.checked_mul(x)?.checked_add(c as i128))
    }

    pub fn eval_big(&self, x: u64) -> BigInt {
        let x = BigInt::from(x);
        self.coeffs.iter().rev().fold(BigInt::from(0), |acc, &c| acc * &x + c)
    }

    /// Value mod `m`, in `[0, m)`.
    pub fn eval_mod(&self, x: u64, m: u64) -> u64 {
        let m128 = m as u128;
        let xr = (x % m) as u128;
        self.coeffs.iter().rev().fold(0u128, |acc, &c| {
            let c = (c as i128).rem_euclid(m as i128) as u128;
            (acc * xr % m128 + c) % m128
        }) as u64
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.coeffs.iter().map(i64::to_string).collect();
        write!(f, "[{}]", s.join(" "))
    }
}

/// A list of polynomials `φ_1, ..., φ_k` whose power sums are compared.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolySystem {
    polys: Vec<Poly>,
}

impl PolySystem {
    pub fn new(polys: Vec<Poly>) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::param("a system needs at least one polynomial"));
        }
        Ok(PolySystem { polys })
    }

    /// `φ_j(z) = z^{d_j}` for the given degrees; with a single degree this is
    /// the one-equation selector used for Waring counts.
    pub fn powers(degrees: &[u32]) -> Result<Self> {
        Self::new(degrees.iter().map(|&d| Poly::monomial(d)).collect())
    }

    pub fn k(&self) -> usize {
        self.polys.len()
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }
}

/// How far a system is from pure powers: `φ_j ≡ z^j (mod p^c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spacing {
    /// `φ_j(z) = z^j` exactly, i.e. `c = ∞`.
    Pure,
    Exponent(u32),
}

/// A `p^c`-spaced system: `φ_j(z) ≡ z^j (mod p^c)` coefficientwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpacedSystem {
    base: u64,
    spacing: Spacing,
    system: PolySystem,
}

impl SpacedSystem {
    pub fn pure_powers(base: u64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        let degrees: Vec<u32> = (1..=k as u32).collect();
        Ok(SpacedSystem {
            base,
            spacing: Spacing::Pure,
            system: PolySystem::powers(&degrees)?,
        })
    }

    /// Checks every coefficient of `φ_j(z) - z^j` against `p^c`.
    pub fn new(base: u64, c: u32, polys: Vec<Poly>) -> Result<Self> {
        let modulus = (base as i128)
            .checked_pow(c)
            .ok_or_else(|| Error::param("p^c overflows"))?;
        for (j, poly) in polys.iter().enumerate() {
            let degree = j + 1;
            let len = poly.coeffs().len().max(degree + 1);
            for i in 0..len {
                let mut coeff = poly.coeffs().get(i).copied().unwrap_or(0) as i128;
                if i == degree {
                    coeff -= 1;
                }
                if coeff % modulus != 0 {
                    return Err(Error::param(format!(
                        "phi_{degree} is not congruent to z^{degree} mod {base}^{c} (coefficient of z^{i})"
                    )));
                }
            }
        }
        Ok(SpacedSystem {
            base,
            spacing: Spacing::Exponent(c),
            system: PolySystem::new(polys)?,
        })
    }

    /// `φ(z) = z + p^c·ψ(z)`, the one-equation spaced system.
    pub fn linear(base: u64, c: u32, psi: &Poly) -> Result<Self> {
        let scale = (base as i64)
            .checked_pow(c)
            .ok_or_else(|| Error::param("p^c overflows"))?;
        let mut coeffs: Vec<i64> = psi
            .coeffs()
            .iter()
            .map(|&a| a.checked_mul(scale).ok_or_else(|| Error::param("coefficient overflow")))
            .collect::<Result<_>>()?;
        if coeffs.len() < 2 {
            coeffs.resize(2, 0);
        }
        coeffs[1] += 1;
        Self::new(base, c, vec![Poly::new(coeffs)])
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn system(&self) -> &PolySystem {
        &self.system
    }
}

impl Deref for SpacedSystem {
    type Target = PolySystem;

    fn deref(&self) -> &PolySystem {
        &self.system
    }
}
