//! Restricted exponential sums and the congruence mean values built on them.
//!
//! For a weight assignment `𝔞` and a system `φ`, `f_a(α, ξ)` sums
//! `𝔞_x e(ψ(x; α))` over the members `x ≡ ξ (mod p^a)`, normalised by the
//! class norm `ρ_a(ξ)`. Averaging powers of these sums over the grid
//! `α = u/p^B` gives `U^{B,h}` and `K`. Every such average equals a weighted
//! count of solutions to a system of congruences mod `p^B`, and that count
//! is the default way of computing it; the grid average is kept as an
//! independent check.

mod weights;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use weights::{ClassNorms, WeightAssignment};

use crate::digit_core::DigitSet;
use crate::error::{Error, Result};
use crate::meanvalue::engine::{self, Block, Evaluations};
use crate::meanvalue::SpacedSystem;
use crate::scalar::Real;
use crate::{stats, Budget};

/// Largest grid (`p^{kB}` points) that is ever averaged directly.
pub const GRID_LIMIT: u64 = 1_000_000;

/// A point `α = u / p^B` of the discrete grid, `1 ≤ u_j ≤ p^B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPoint {
    b: u32,
    u: Vec<u64>,
}

impl GridPoint {
    pub fn new(base: u64, b: u32, u: Vec<u64>) -> Result<Self> {
        let m = base
            .checked_pow(b)
            .ok_or_else(|| Error::param("grid modulus overflows"))?;
        if u.is_empty() || u.iter().any(|&v| v == 0 || v > m) {
            return Err(Error::param(format!("grid coordinates must lie in [1, {m}]")));
        }
        Ok(GridPoint { b, u })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn u(&self) -> &[u64] {
        &self.u
    }

    /// The origin, represented by `u = (p^B, …, p^B)`.
    pub fn origin(base: u64, b: u32, k: usize) -> Result<Self> {
        let m = base
            .checked_pow(b)
            .ok_or_else(|| Error::param("grid modulus overflows"))?;
        Self::new(base, b, vec![m; k])
    }
}

/// `n` grid points drawn uniformly with a seeded generator.
pub fn sample_grid_points(base: u64, b: u32, k: usize, n: usize, seed: u64) -> Result<Vec<GridPoint>> {
    let m = base
        .checked_pow(b)
        .ok_or_else(|| Error::param("grid modulus overflows"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| GridPoint::new(base, b, (0..k).map(|_| rng.gen_range(1..=m)).collect()))
        .collect()
}

/// Everything a congruence mean value depends on.
#[derive(Debug, Clone)]
pub struct MeanValueSpec<W> {
    pub s: usize,
    pub b: u32,
    /// Class level for `U^{B,h}`; 0 gives `U^B`.
    pub h: u32,
    pub budget: Budget,
    system: SpacedSystem,
    digit_set: DigitSet,
    weights: WeightAssignment<W>,
}

impl<W: Real> MeanValueSpec<W> {
    pub fn new(
        digit_set: DigitSet,
        system: SpacedSystem,
        weights: WeightAssignment<W>,
        s: usize,
        b: u32,
        h: u32,
    ) -> Result<Self> {
        if s == 0 {
            return Err(Error::param("s must be at least 1"));
        }
        if b == 0 {
            return Err(Error::param("B must be at least 1"));
        }
        if h > b {
            return Err(Error::param(format!("class level h={h} exceeds B={b}")));
        }
        if system.base() != digit_set.base() {
            return Err(Error::param("system base differs from the digit-set base"));
        }
        digit_set.modulus(b)?;
        weights.check_members(&digit_set)?;
        Ok(MeanValueSpec {
            s,
            b,
            h,
            budget: Budget::default(),
            system,
            digit_set,
            weights,
        })
    }

    /// Drops support members above `x_max`.
    pub fn truncated(&self, x_max: u64) -> Result<Self> {
        let mut out = self.clone();
        out.weights = self.weights.truncate(x_max)?;
        Ok(out)
    }

    pub fn with_h(&self, h: u32) -> Result<Self> {
        Self::new(
            self.digit_set.clone(),
            self.system.clone(),
            self.weights.clone(),
            self.s,
            self.b,
            h,
        )
    }

    pub fn with_weights(&self, weights: WeightAssignment<W>) -> Result<Self> {
        Self::new(
            self.digit_set.clone(),
            self.system.clone(),
            weights,
            self.s,
            self.b,
            self.h,
        )
    }

    pub fn k(&self) -> usize {
        self.system.k()
    }

    pub fn base(&self) -> u64 {
        self.digit_set.base()
    }

    /// `p^B`.
    pub fn modulus(&self) -> u64 {
        self.digit_set.power(self.b).expect("checked on construction")
    }

    pub fn system(&self) -> &SpacedSystem {
        &self.system
    }

    pub fn digit_set(&self) -> &DigitSet {
        &self.digit_set
    }

    pub fn weights(&self) -> &WeightAssignment<W> {
        &self.weights
    }

    pub fn norms(&self, level: u32) -> Result<ClassNorms<W>> {
        ClassNorms::new(&self.weights, self.base(), level)
    }

    fn residues(&self, x: u64) -> Vec<u64> {
        let m = self.modulus();
        self.system.polys().iter().map(|p| p.eval_mod(x, m)).collect()
    }

    fn check_point(&self, point: &GridPoint) -> Result<()> {
        if point.b != self.b || point.u.len() != self.k() {
            return Err(Error::param("grid point does not match B and k"));
        }
        Ok(())
    }
}

fn phase(residues: &[u64], u: &[u64], modulus: u64) -> u64 {
    let m = modulus as u128;
    let n = residues
        .iter()
        .zip(u)
        .fold(0u128, |acc, (&r, &v)| (acc + r as u128 * (v as u128 % m)) % m);
    n as u64
}

fn e(n: u64, modulus: u64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * n as f64 / modulus as f64)
}

/// `f_a(α, ξ) = ρ_a(ξ)⁻¹ Σ_{x ≡ ξ (p^a)} 𝔞_x e(ψ(x; α))`; an empty class
/// gives 0.
pub fn restricted_sum<W: Real>(spec: &MeanValueSpec<W>, point: &GridPoint, a: u32, xi: u64) -> Result<Complex64> {
    spec.check_point(point)?;
    let norms = spec.norms(a)?;
    let rho_sq = norms.rho_sq(xi).to_f64();
    if rho_sq == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let m = spec.modulus();
    let sum: Complex64 = norms
        .members(xi)
        .iter()
        .map(|(x, w)| e(phase(&spec.residues(*x), &point.u, m), m) * w.to_f64())
        .sum();
    Ok(sum / rho_sq.sqrt())
}

/// Averages `f` over the full grid `[1, m]^k` with a fixed summation tree.
pub fn grid_average(modulus: u64, k: usize, f: impl Fn(&[u64]) -> f64 + Sync) -> Result<f64> {
    let points = (modulus as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if points > GRID_LIMIT as u128 {
        return Err(Error::Budget {
            what: "grid average",
            needed: points,
            limit: GRID_LIMIT as u128,
        });
    }
    let n = points as usize;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|mut i| {
            let u: Vec<u64> = (0..k)
                .map(|_| {
                    let v = (i as u64 % modulus) + 1;
                    i /= modulus as usize;
                    v
                })
                .collect();
            f(&u)
        })
        .collect();
    Ok(stats::pairwise_sum(&values) / n as f64)
}

/// `(ξ, ρ², [(𝔞_x, φ(x) mod p^B)])`.
type GridClass = (u64, f64, Vec<(f64, Vec<u64>)>);

/// Per-member data for fast evaluation of class sums on the grid.
struct GridClasses {
    modulus: u64,
    roots: Vec<Complex64>,
    classes: Vec<GridClass>,
}

impl GridClasses {
    fn new<W: Real>(spec: &MeanValueSpec<W>, norms: &ClassNorms<W>) -> Self {
        let modulus = spec.modulus();
        let roots = (0..modulus).map(|n| e(n, modulus)).collect();
        let classes = norms
            .classes()
            .map(|xi| {
                let members = norms
                    .members(xi)
                    .iter()
                    .map(|(x, w)| (w.to_f64(), spec.residues(*x)))
                    .collect();
                (xi, norms.rho_sq(xi).to_f64(), members)
            })
            .collect();
        GridClasses {
            modulus,
            roots,
            classes,
        }
    }

    /// `|Σ_{x ∈ ξ} 𝔞_x e(ψ(x; α))|²` for every class.
    fn abs_sq(&self, u: &[u64]) -> Vec<f64> {
        self.classes
            .iter()
            .map(|(_, _, members)| {
                members
                    .iter()
                    .map(|(w, r)| self.roots[phase(r, u, self.modulus) as usize] * *w)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .collect()
    }
}

/// How a discrete integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Weighted count of the congruence system (exact for rational weights).
    #[default]
    Count,
    /// Direct average over the `p^{kB}` grid.
    Grid,
}

/// Parameters of the two-class mean value `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KParams {
    pub t: usize,
    pub r: usize,
    pub a: u32,
    pub b: u32,
    /// Exclude pairs with `ξ ≡ η (mod p^ν)`; `None` keeps every pair.
    pub nu: Option<u32>,
}

impl KParams {
    /// `R = t·r(r+1)/2`.
    pub fn big_r(&self) -> usize {
        self.t * self.r * (self.r + 1) / 2
    }

    fn validate(&self, s: usize, k: usize) -> Result<()> {
        if self.r > k {
            return Err(Error::param(format!("r={} exceeds k={k}", self.r)));
        }
        if self.big_r() > s {
            return Err(Error::param(format!("R={} exceeds s={s}", self.big_r())));
        }
        if self.nu == Some(0) {
            return Err(Error::param("nu must be at least 1"));
        }
        Ok(())
    }

    fn keeps(&self, base: u64, xi: u64, eta: u64) -> bool {
        match self.nu {
            None => true,
            Some(nu) => match base.checked_pow(nu) {
                Some(m) => xi % m != eta % m,
                None => xi != eta,
            },
        }
    }
}

/// The integrand of a discrete integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrand {
    /// `U^{B,h}` at the given class level.
    U { h: u32 },
    /// `K` for one class pair, or the `ν`-excluded aggregate.
    K { params: KParams, pair: Option<(u64, u64)> },
}

/// Evaluates an integrand by counting or on the grid.
pub fn discrete_integral<W: Real>(spec: &MeanValueSpec<W>, integrand: &Integrand, mode: Mode) -> Result<f64> {
    match (integrand, mode) {
        (Integrand::U { h }, Mode::Count) => Ok(mean_value_U(&spec.with_h(*h)?)?.to_f64()),
        (Integrand::U { h }, Mode::Grid) => grid_U(&spec.with_h(*h)?),
        (Integrand::K { params, pair }, Mode::Count) => Ok(mean_value_K(spec, params, *pair)?.to_f64()),
        (Integrand::K { params, pair }, Mode::Grid) => grid_K(spec, params, *pair),
    }
}

/// Weighted `Σ m(v)²` mod `p^B` for tuples drawn from the given blocks.
fn class_count<W: Real>(spec: &MeanValueSpec<W>, blocks: &[(&[(u64, W)], usize)]) -> Result<W> {
    let members: Vec<u64> = blocks.iter().flat_map(|(m, _)| m.iter().map(|(x, _)| *x)).collect();
    let weights: Vec<W> = blocks
        .iter()
        .flat_map(|(m, _)| m.iter().map(|(_, w)| w.clone()))
        .collect();
    let total_vars = blocks.iter().map(|(_, n)| n).sum();
    let evals = Evaluations::new(spec.system(), &members, Some(spec.modulus()), total_vars)?;
    let mut start = 0;
    let mut eblocks = Vec::with_capacity(blocks.len());
    for (m, size) in blocks {
        eblocks.push(Block {
            members: (start..start + m.len()).collect(),
            size: *size,
        });
        start += m.len();
    }
    engine::weighted_sum_squares(&evals, &eblocks, &weights, &spec.budget)
}

/// `U^{B,h} = ρ_0⁻² Σ_ξ ρ_h(ξ)^{2−2s} · (weighted solutions with x ≡ y ≡ ξ)`,
/// with `h = spec.h`.
#[allow(non_snake_case)]
pub fn mean_value_U<W: Real>(spec: &MeanValueSpec<W>) -> Result<W> {
    let norms = spec.norms(spec.h)?;
    let mut acc = W::zero();
    for xi in norms.classes() {
        let count = class_count(spec, &[(norms.members(xi), spec.s)])?;
        acc.add_assign(&norms.rho_sq(xi).powi(1 - spec.s as i32).mul(&count));
    }
    Ok(acc.div(spec.weights.rho0_sq()))
}

#[allow(non_snake_case)]
fn grid_U<W: Real>(spec: &MeanValueSpec<W>) -> Result<f64> {
    let norms = spec.norms(spec.h)?;
    let g = GridClasses::new(spec, &norms);
    let s = spec.s as i32;
    let avg = grid_average(spec.modulus(), spec.k(), |u| {
        let sq = g.abs_sq(u);
        let terms: Vec<f64> = g
            .classes
            .iter()
            .zip(&sq)
            .map(|((_, rho_sq, _), a)| rho_sq.powi(1 - s) * a.powi(s))
            .collect();
        stats::pairwise_sum(&terms)
    })?;
    Ok(avg / spec.weights.rho0_sq().to_f64())
}

/// `K(ξ, η)` for one pair, or the aggregate
/// `ρ_0⁻⁴ Σ_{ξ ≢ η (p^ν)} ρ_a(ξ)² ρ_b(η)² K(ξ, η)`.
///
/// `K(ξ, η)` counts `(x, y, u, v)` with `R` variables on each side in class
/// `ξ mod p^a` and `s − R` in class `η mod p^b`, weighted by
/// `ρ_a(ξ)^{−2R} ρ_b(η)^{2R−2s} 𝔞_x 𝔞_y 𝔞_u 𝔞_v`.
#[allow(non_snake_case)]
pub fn mean_value_K<W: Real>(spec: &MeanValueSpec<W>, params: &KParams, pair: Option<(u64, u64)>) -> Result<W> {
    params.validate(spec.s, spec.k())?;
    let na = spec.norms(params.a)?;
    let nb = spec.norms(params.b)?;
    let big_r = params.big_r();
    let rest = spec.s - big_r;
    let single = |xi: u64, eta: u64| -> Result<W> {
        let (ra, rb) = (na.rho_sq(xi), nb.rho_sq(eta));
        if ra.is_zero() || rb.is_zero() {
            return Ok(W::zero());
        }
        let count = class_count(spec, &[(na.members(xi), big_r), (nb.members(eta), rest)])?;
        Ok(ra
            .powi(-(big_r as i32))
            .mul(&rb.powi(big_r as i32 - spec.s as i32))
            .mul(&count))
    };
    if let Some((xi, eta)) = pair {
        return single(xi, eta);
    }
    let mut acc = W::zero();
    for xi in na.classes() {
        for eta in nb.classes() {
            if !params.keeps(spec.base(), xi, eta) {
                continue;
            }
            let term = na.rho_sq(xi).mul(&nb.rho_sq(eta)).mul(&single(xi, eta)?);
            acc.add_assign(&term);
        }
    }
    let rho0_sq = spec.weights.rho0_sq();
    Ok(acc.div(&rho0_sq.mul(rho0_sq)))
}

#[allow(non_snake_case)]
fn grid_K<W: Real>(spec: &MeanValueSpec<W>, params: &KParams, pair: Option<(u64, u64)>) -> Result<f64> {
    params.validate(spec.s, spec.k())?;
    let na = spec.norms(params.a)?;
    let nb = spec.norms(params.b)?;
    let ga = GridClasses::new(spec, &na);
    let gb = GridClasses::new(spec, &nb);
    let big_r = params.big_r() as i32;
    let rest = spec.s as i32 - big_r;
    let base = spec.base();
    let (ma, mb) = (na.modulus(), nb.modulus());
    let pairs: Vec<(usize, usize)> = ga
        .classes
        .iter()
        .enumerate()
        .flat_map(|(i, (xi, _, _))| {
            gb.classes.iter().enumerate().filter_map(move |(j, (eta, _, _))| {
                let wanted = match pair {
                    Some((x, y)) => x % ma == *xi && y % mb == *eta,
                    None => params.keeps(base, *xi, *eta),
                };
                wanted.then_some((i, j))
            })
        })
        .collect();
    let avg = grid_average(spec.modulus(), spec.k(), |u| {
        let sa = ga.abs_sq(u);
        let sb = gb.abs_sq(u);
        let terms: Vec<f64> = pairs
            .iter()
            .map(|&(i, j)| {
                // Aggregate terms carry the extra ρ_a² ρ_b² factor.
                let (ea, eb) = if pair.is_some() {
                    (-big_r, -rest)
                } else {
                    (1 - big_r, 1 - rest)
                };
                ga.classes[i].1.powi(ea) * sa[i].powi(big_r) * gb.classes[j].1.powi(eb) * sb[j].powi(rest)
            })
            .collect();
        stats::pairwise_sum(&terms)
    })?;
    if pair.is_some() {
        Ok(avg)
    } else {
        let r0 = spec.weights.rho0_sq().to_f64();
        Ok(avg / (r0 * r0))
    }
}

/// `K̃ = (K / (q_H^Δ · U^{B,H}))^{(k−1)/(r(k−r))}`, where `q_h` is the level-`H`
/// normaliser (`q^H` or the number of classes).
pub fn normalize_k(k_value: f64, delta: f64, r: usize, k: usize, u_bh: f64, q_h: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::param("normalisation needs k ≥ 2"));
    }
    if r == 0 || r >= k {
        return Err(Error::param(format!("r must lie in [1, {}]", k - 1)));
    }
    if u_bh.is_nan() || u_bh <= 0.0 {
        return Err(Error::Degenerate("U^{B,H} must be positive".into()));
    }
    let exponent = (k - 1) as f64 / (r * (k - r)) as f64;
    Ok((k_value / (q_h.powf(delta) * u_bh)).powf(exponent))
}

/// The exact Hölder step `U^B ≤ N_H^s · U^{B,H}` with `N_H` the number of
/// classes at level `H = spec.h`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderCheck<W> {
    pub u_b: W,
    pub u_bh: W,
    pub classes: usize,
    pub bound: W,
    pub holds: bool,
}

pub fn holder_check<W: Real>(spec: &MeanValueSpec<W>) -> Result<HolderCheck<W>> {
    let u_b = mean_value_U(&spec.with_h(0)?)?;
    let u_bh = mean_value_U(spec)?;
    let classes = spec.norms(spec.h)?.len();
    let factor = (classes as u128)
        .checked_pow(spec.s as u32)
        .ok_or_else(|| Error::param("class count power overflows"))?;
    let bound = u_bh.mul(&W::from_u128(factor));
    let holds = u_b <= bound || (!W::EXACT && weights::same(&u_b, &bound));
    Ok(HolderCheck {
        u_b,
        u_bh,
        classes,
        bound,
        holds,
    })
}

/// A finite-`B` estimate of `λ` at `H = ⌈B/k⌉`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRatio<W> {
    pub b: u32,
    pub h: u32,
    pub s: usize,
    pub k: usize,
    pub u_b: W,
    pub u_bh: W,
    /// `q = #A_p`.
    pub q: usize,
    /// Classes with positive norm at level `H`.
    pub classes: usize,
    /// `log(U^B/U^{B,H}) / log(q^H)`.
    pub ratio_q: f64,
    /// `log(U^B/U^{B,H}) / log(#classes)`, when there is more than one class.
    pub ratio_classes: Option<f64>,
    /// `s·log(#classes)/log(q^H) − s`: the slack in `ratio_q ≤ s + ε̂`.
    pub eps_hat: f64,
}

/// `U^B` and `U^{B,H}` by counting and their log-ratio against both
/// normalisers. Fails with [`Error::Invariant`] if the exact Hölder bound
/// is violated.
pub fn lambda_ratio<W: Real>(spec: &MeanValueSpec<W>) -> Result<LambdaRatio<W>> {
    let k = spec.k();
    let h = spec.b.div_ceil(k as u32);
    let check = holder_check(&spec.with_h(h)?)?;
    if check.u_bh.is_zero() {
        return Err(Error::Degenerate("U^{B,H} vanishes".into()));
    }
    let q = spec.digit_set.r();
    let log_q_h = h as f64 * (q as f64).ln();
    if log_q_h.is_nan() || log_q_h <= 0.0 {
        return Err(Error::Degenerate("q^H must exceed 1".into()));
    }
    let log_ratio = check.u_b.div(&check.u_bh).to_f64().ln();
    let s = spec.s as f64;
    let log_classes = (check.classes as f64).ln();
    let eps_hat = s * log_classes / log_q_h - s;
    let ratio_q = log_ratio / log_q_h;
    if !check.holds {
        return Err(Error::Invariant(format!(
            "Hölder bound violated: U^B={} > {}^{}·U^(B,H)={}",
            check.u_b.to_f64(),
            check.classes,
            spec.s,
            check.bound.to_f64()
        )));
    }
    Ok(LambdaRatio {
        b: spec.b,
        h,
        s: spec.s,
        k,
        u_b: check.u_b,
        u_bh: check.u_bh,
        q,
        classes: check.classes,
        ratio_q,
        ratio_classes: (check.classes > 1).then(|| log_ratio / log_classes),
        eps_hat,
    })
}

/// Outcome of the class-splitting inequality
/// `ρ_a(ξ)² |f_a|^{2w} ≤ C^{w(b−a)} Σ_{ζ ≡ ξ} ρ_b(ζ)² |f_b(·, ζ)|^{2w}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRefinementReport {
    pub passed: bool,
    /// Smallest `rhs / lhs` over points with `lhs > 0` (infinite if none).
    pub worst_margin: f64,
    /// `C`: the largest number of level-`(l+1)` classes inside one level-`l`
    /// class, for `a ≤ l < b`, within `ξ`.
    pub factor: usize,
    pub points: usize,
}

pub fn class_refinement_check<W: Real>(
    spec: &MeanValueSpec<W>,
    a: u32,
    b: u32,
    w: u32,
    xi: u64,
    points: &[GridPoint],
) -> Result<ClassRefinementReport> {
    if a > b {
        return Err(Error::param("need a ≤ b"));
    }
    if w == 0 {
        return Err(Error::param("w must be positive"));
    }
    let na = spec.norms(a)?;
    let nb = spec.norms(b)?;
    let mut factor = 1;
    let mut level = vec![xi % na.modulus()];
    for l in a..b {
        let coarse = spec.norms(l)?;
        let fine = spec.norms(l + 1)?;
        let mut next = Vec::new();
        for &z in &level {
            let kids: Vec<u64> = coarse.children(z, &fine).collect();
            factor = factor.max(kids.len());
            next.extend(kids);
        }
        level = next;
    }
    let ga = GridClasses::new(spec, &na);
    let gb = GridClasses::new(spec, &nb);
    let ia = ga.classes.iter().position(|(c, _, _)| *c == xi % na.modulus());
    let kids: Vec<usize> = gb
        .classes
        .iter()
        .enumerate()
        .filter(|(_, (z, _, _))| z % na.modulus() == xi % na.modulus())
        .map(|(j, _)| j)
        .collect();
    let scale = (factor as f64).powi((w * (b - a)) as i32);
    let wi = w as i32;
    let mut worst = f64::INFINITY;
    let mut passed = true;
    for point in points {
        spec.check_point(point)?;
        let Some(i) = ia else { continue };
        let lhs = ga.classes[i].1.powi(1 - wi) * ga.abs_sq(&point.u)[i].powi(wi);
        let sb = gb.abs_sq(&point.u);
        let terms: Vec<f64> = kids
            .iter()
            .map(|&j| gb.classes[j].1.powi(1 - wi) * sb[j].powi(wi))
            .collect();
        let rhs = scale * stats::pairwise_sum(&terms);
        if lhs > rhs * (1.0 + 1e-9) + 1e-300 {
            passed = false;
        }
        if lhs > 0.0 {
            worst = worst.min(rhs / lhs);
        }
    }
    Ok(ClassRefinementReport {
        passed,
        worst_margin: worst,
        factor,
        points: points.len(),
    })
}
