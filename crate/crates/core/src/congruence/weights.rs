use std::collections::BTreeMap;

use crate::digit_core::DigitSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Weights `𝔞_x ∈ [0, 1]` on a finite set of members.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment<W> {
    support: Vec<(u64, W)>,
    rho0_sq: W,
}

impl<W: Real> WeightAssignment<W> {
    /// Validates `0 ≤ 𝔞_x ≤ 1` and `Σ 𝔞_x > 0`. Members must be distinct.
    pub fn new(mut pairs: Vec<(u64, W)>) -> Result<Self> {
        pairs.sort_by_key(|&(x, _)| x);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::param("weight support has repeated members"));
        }
        let zero = W::zero();
        let one = W::one();
        let mut mass = W::zero();
        let mut rho0_sq = W::zero();
        for (x, w) in &pairs {
            if !(*w >= zero && *w <= one) {
                return Err(Error::param(format!("weight of {x} outside [0, 1]")));
            }
            mass.add_assign(w);
            rho0_sq.add_assign(&w.mul(w));
        }
        if mass.partial_cmp(&zero) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Degenerate("weights sum to zero".into()));
        }
        Ok(WeightAssignment {
            support: pairs,
            rho0_sq,
        })
    }

    /// Weight 1 on every listed member.
    pub fn unit(members: &[u64]) -> Result<Self> {
        let mut m = members.to_vec();
        m.sort_unstable();
        m.dedup();
        Self::new(m.into_iter().map(|x| (x, W::one())).collect())
    }

    pub fn support(&self) -> &[(u64, W)] {
        &self.support
    }

    pub fn members(&self) -> Vec<u64> {
        self.support.iter().map(|&(x, _)| x).collect()
    }

    /// `𝔞_x`, zero off the support.
    pub fn weight(&self, x: u64) -> W {
        match self.support.binary_search_by_key(&x, |&(m, _)| m) {
            Ok(i) => self.support[i].1.clone(),
            Err(_) => W::zero(),
        }
    }

    /// `ρ_0² = Σ 𝔞_x²`.
    pub fn rho0_sq(&self) -> &W {
        &self.rho0_sq
    }

    /// Keeps members `≤ x_max`.
    pub fn truncate(&self, x_max: u64) -> Result<Self> {
        self.restrict(|x| x <= x_max)
    }

    pub fn restrict(&self, keep: impl Fn(u64) -> bool) -> Result<Self> {
        Self::new(self.support.iter().filter(|(x, _)| keep(*x)).cloned().collect())
    }

    /// Every supported member belongs to `E`.
    pub fn check_members(&self, set: &DigitSet) -> Result<()> {
        match self.support.iter().find(|(x, _)| !set.is_member(*x)) {
            Some((x, _)) => Err(Error::param(format!("{x} is not a member of {set}"))),
            None => Ok(()),
        }
    }

    /// The weights zeroed off the class `x ≡ 0 (mod p^h)`.
    pub fn single_class(&self, base: u64, h: u32) -> Result<Self> {
        let m = base
            .checked_pow(h)
            .ok_or_else(|| Error::param("class modulus overflows"))?;
        let zeroed = self
            .support
            .iter()
            .map(|(x, w)| (*x, if x % m == 0 { w.clone() } else { W::zero() }))
            .collect();
        Self::new(zeroed)
    }
}

/// The class norms `ρ_a(ξ)²` at one level, over classes with positive norm.
///
/// Classes are indexed by the residue `ξ = x mod p^a` of their members.
#[derive(Debug, Clone)]
pub struct ClassNorms<W> {
    level: u32,
    modulus: u64,
    classes: BTreeMap<u64, ClassEntry<W>>,
}

#[derive(Debug, Clone)]
struct ClassEntry<W> {
    rho_sq: W,
    members: Vec<(u64, W)>,
}

impl<W: Real> ClassNorms<W> {
    pub fn new(weights: &WeightAssignment<W>, base: u64, level: u32) -> Result<Self> {
        let modulus = base
            .checked_pow(level)
            .ok_or_else(|| Error::param(format!("{base}^{level} does not fit in 64 bits")))?;
        let mut classes: BTreeMap<u64, ClassEntry<W>> = BTreeMap::new();
        for (x, w) in weights.support() {
            if w.is_zero() {
                continue;
            }
            let e = classes.entry(x % modulus).or_insert_with(|| ClassEntry {
                rho_sq: W::zero(),
                members: Vec::new(),
            });
            e.rho_sq.add_assign(&w.mul(w));
            e.members.push((*x, w.clone()));
        }
        Ok(ClassNorms {
            level,
            modulus,
            classes,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of classes with `ρ_a(ξ) > 0`.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// `ρ_a(ξ)²`, zero for an empty class.
    pub fn rho_sq(&self, xi: u64) -> W {
        self.classes
            .get(&(xi % self.modulus))
            .map_or_else(W::zero, |e| e.rho_sq.clone())
    }

    /// The classes `ξ` in increasing order.
    pub fn classes(&self) -> impl Iterator<Item = u64> + '_ {
        self.classes.keys().copied()
    }

    /// Members of class `ξ` with their weights.
    pub fn members(&self, xi: u64) -> &[(u64, W)] {
        self.classes
            .get(&(xi % self.modulus))
            .map_or(&[], |e| e.members.as_slice())
    }

    /// `Σ_ξ ρ_a(ξ)²`.
    pub fn total(&self) -> W {
        let mut acc = W::zero();
        for e in self.classes.values() {
            acc.add_assign(&e.rho_sq);
        }
        acc
    }

    /// `Σ_ξ ρ_a(ξ)² = ρ_0²`.
    pub fn partition_holds(&self, weights: &WeightAssignment<W>) -> bool {
        same(&self.total(), weights.rho0_sq())
    }

    /// `Σ_{ξ' ≡ ξ (p^a)} ρ_b(ξ')² = ρ_a(ξ)²` for every class of `self`,
    /// where `finer` is level `b ≥ a`.
    pub fn refinement_holds(&self, finer: &ClassNorms<W>) -> bool {
        if finer.level < self.level {
            return false;
        }
        let mut sums: BTreeMap<u64, W> = BTreeMap::new();
        for (xi, e) in &finer.classes {
            sums.entry(xi % self.modulus)
                .or_insert_with(W::zero)
                .add_assign(&e.rho_sq);
        }
        sums.len() == self.classes.len()
            && self
                .classes
                .iter()
                .all(|(xi, e)| sums.get(xi).is_some_and(|s| same(s, &e.rho_sq)))
    }

    /// Classes of `finer` lying inside class `ξ` of `self`.
    pub fn children<'a>(&self, xi: u64, finer: &'a ClassNorms<W>) -> impl Iterator<Item = u64> + 'a {
        let m = self.modulus;
        let xi = xi % m;
        finer.classes().filter(move |z| z % m == xi)
    }
}

/// Equality for exact weights, `10⁻¹²` relative agreement for doubles.
pub(crate) fn same<W: Real>(a: &W, b: &W) -> bool {
    if W::EXACT {
        return a == b;
    }
    let (x, y) = (a.to_f64(), b.to_f64());
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn validation() {
        assert!(WeightAssignment::new(vec![(1, 1.5)]).is_err());
        assert!(WeightAssignment::new(vec![(1, -0.1)]).is_err());
        assert!(WeightAssignment::new(vec![(1, 0.0), (3, 0.0)]).is_err());
        assert!(WeightAssignment::new(vec![(1, 0.5), (1, 0.5)]).is_err());
        let w = WeightAssignment::new(vec![(4, q(1, 2)), (1, q(1, 3))]).unwrap();
        assert_eq!(w.members(), vec![1, 4]);
        assert_eq!(*w.rho0_sq(), q(13, 36));
        assert_eq!(w.weight(2), q(0, 1));
    }

    #[test]
    fn norms_on_small_set() {
        let w = WeightAssignment::<BigRational>::unit(&[1, 3, 4, 9]).unwrap();
        let n1 = ClassNorms::new(&w, 3, 1).unwrap();
        assert_eq!(n1.len(), 2);
        assert_eq!(n1.rho_sq(1), q(2, 1));
        assert_eq!(n1.rho_sq(0), q(2, 1));
        assert_eq!(n1.rho_sq(2), q(0, 1));
        let n2 = ClassNorms::new(&w, 3, 2).unwrap();
        assert_eq!(n2.classes().collect::<Vec<_>>(), vec![0, 1, 3, 4]);
        assert!(n1.partition_holds(&w) && n2.partition_holds(&w));
        assert!(n1.refinement_holds(&n2));
        assert!(!n2.refinement_holds(&n1));
        let n0 = ClassNorms::new(&w, 3, 0).unwrap();
        assert_eq!(n0.len(), 1);
        assert_eq!(n0.rho_sq(7), q(4, 1));
        assert_eq!(n1.children(1, &n2).collect::<Vec<_>>(), vec![1, 4]);
    }

    #[test]
    fn single_class_keeps_zero_class() {
        let w = WeightAssignment::<f64>::unit(&[1, 3, 4, 9, 10, 12]).unwrap();
        let b = w.single_class(3, 1).unwrap();
        assert_eq!(
            ClassNorms::new(&b, 3, 1).unwrap().classes().collect::<Vec<_>>(),
            vec![0]
        );
        assert!(w.single_class(3, 3).is_err());
    }
}
