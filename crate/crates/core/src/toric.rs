//! Monomial ideals of `K[[S]]` through their staircases `ϑ(I) ⊆ S`: colengths,
//! Frobenius and ordinary powers, the Cartier floor rule and Hilbert-Kunz
//! multiplicities.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cone::is_positive_on;
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, WeightVector};
use crate::orthant::{self, StaircaseIndex};
use crate::psystem::{degree_at_least, exponent_of, is_prime, prime_power};
use crate::report::{ConvergenceReport, SequencePoint};
use crate::semigroup::{minimalize_i64, SemigroupIdeal, StandardSemigroup};

/// Complements larger than this are refused by the breadth-first colength
/// walk on non-orthant semigroups.
pub const GENERAL_COLENGTH_CAP: usize = 50_000_000;

/// `K[[S]]` in characteristic `p`, with valuation weights `a`.
#[derive(Debug)]
pub struct ToricRing {
    semigroup: Arc<StandardSemigroup>,
    p: u32,
    a: WeightVector,
}

impl ToricRing {
    /// Without explicit weights the semigroup's pointedness witness is used.
    pub fn new(semigroup: Arc<StandardSemigroup>, p: u32, a: Option<WeightVector>) -> Result<ToricRing> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("p = {p} is not prime")));
        }
        let a = match a {
            Some(a) => {
                if a.dim() != semigroup.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: semigroup.dim(),
                        found: a.dim(),
                    });
                }
                if !is_positive_on(semigroup.cone(), &a) {
                    return Err(Error::InvalidWeights("not positive on the cone".into()));
                }
                a
            }
            None => semigroup.witness().clone(),
        };
        Ok(ToricRing { semigroup, p, a })
    }

    /// `K[[x_1, ..., x_d]]` with unit weights.
    pub fn regular(d: usize, p: u32) -> Result<ToricRing> {
        ToricRing::new(Arc::new(StandardSemigroup::regular(d)?), p, None)
    }

    pub fn semigroup(&self) -> &Arc<StandardSemigroup> {
        &self.semigroup
    }

    pub fn dim(&self) -> usize {
        self.semigroup.dim()
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn a(&self) -> &WeightVector {
        &self.a
    }

    pub fn is_regular(&self) -> bool {
        self.semigroup.is_regular()
    }
}

/// A monomial ideal, stored as its minimal staircase.
#[derive(Clone)]
pub struct MonomialIdeal {
    ring: Arc<ToricRing>,
    staircase: SemigroupIdeal,
}

impl fmt::Debug for MonomialIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MonomialIdeal{:?}", self.staircase)
    }
}

impl PartialEq for MonomialIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.staircase == other.staircase && self.ring.p == other.ring.p
    }
}

impl MonomialIdeal {
    pub fn new(ring: Arc<ToricRing>, gens: &[LatticePoint]) -> Result<MonomialIdeal> {
        let staircase = SemigroupIdeal::new(ring.semigroup.clone(), gens)?;
        Ok(MonomialIdeal { ring, staircase })
    }

    pub fn from_staircase(ring: Arc<ToricRing>, staircase: SemigroupIdeal) -> Result<MonomialIdeal> {
        if **staircase.parent() != *ring.semigroup {
            return Err(Error::InvalidParameter(
                "staircase lives over a different semigroup".into(),
            ));
        }
        Ok(MonomialIdeal { ring, staircase })
    }

    /// The maximal ideal, generated by the semigroup generators.
    pub fn maximal(ring: Arc<ToricRing>) -> MonomialIdeal {
        let gens = ring.semigroup.generators_i64().to_vec();
        let staircase = SemigroupIdeal::from_i64_unchecked(ring.semigroup.clone(), gens);
        MonomialIdeal { ring, staircase }
    }

    pub fn unit(ring: Arc<ToricRing>) -> MonomialIdeal {
        let staircase = SemigroupIdeal::unit(ring.semigroup.clone());
        MonomialIdeal { ring, staircase }
    }

    pub fn ring(&self) -> &Arc<ToricRing> {
        &self.ring
    }

    pub fn staircase(&self) -> &SemigroupIdeal {
        &self.staircase
    }

    pub fn generators(&self) -> &[LatticePoint] {
        self.staircase.generators()
    }

    pub fn is_m_primary(&self) -> bool {
        self.staircase.is_cofinite()
    }

    fn is_maximal(&self) -> bool {
        let mut mine = self.staircase.generators_i64().to_vec();
        let mut m = minimalize_i64(&self.ring.semigroup, self.ring.semigroup.generators_i64().to_vec());
        mine.sort();
        m.sort();
        mine == m
    }

    fn with_gens(&self, gens: Vec<Vec<i64>>) -> MonomialIdeal {
        MonomialIdeal {
            ring: self.ring.clone(),
            staircase: SemigroupIdeal::from_i64_unchecked(self.ring.semigroup.clone(), gens),
        }
    }

    /// `#(S \ ϑ(I)) = ℓ(R / I)`.
    pub fn colength(&self) -> Result<BigInt> {
        colength_of(&self.staircase)
    }

    /// `I^{[q]}`, generated by `q t`.
    pub fn frobenius_power(&self, q: u64) -> Result<MonomialIdeal> {
        exponent_of(self.ring.p, q)?;
        let k = i64::try_from(q).map_err(|_| Error::Overflow)?;
        Ok(MonomialIdeal {
            ring: self.ring.clone(),
            staircase: self.staircase.scaled(k)?,
        })
    }

    /// `I J`, generated by pairwise sums.
    pub fn product(&self, other: &MonomialIdeal) -> Result<MonomialIdeal> {
        let mut sums: HashSet<Vec<i64>> = HashSet::new();
        for a in self.staircase.generators_i64() {
            for b in other.staircase.generators_i64() {
                let s = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| x.checked_add(*y).ok_or(Error::Overflow))
                    .collect::<Result<Vec<_>>>()?;
                sums.insert(s);
            }
        }
        Ok(self.with_gens(sums.into_iter().collect()))
    }

    /// `I^n` for `n >= 1`.
    pub fn ordinary_power(&self, n: u64) -> Result<MonomialIdeal> {
        if n < 1 {
            return Err(Error::InvalidParameter("power exponent must be at least 1".into()));
        }
        if self.ring.is_regular() && self.is_maximal() {
            // m^n = {u : |u| >= n} in N^d.
            let staircase = degree_at_least(self.ring.semigroup.clone(), n)?;
            return Ok(MonomialIdeal {
                ring: self.ring.clone(),
                staircase,
            });
        }
        let mut result: Option<MonomialIdeal> = None;
        let mut base = self.clone();
        let mut n = n;
        loop {
            if n & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.product(&base)?,
                });
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            base = base.product(&base)?;
        }
        Ok(result.expect("n >= 1"))
    }

    /// `J_q = {b : ⌊b/q⌋ ∈ ϑ(I)}` on `N^d`.
    pub fn cartier_contraction(&self, q: u64) -> Result<MonomialIdeal> {
        if !self.ring.is_regular() {
            return Err(Error::RequiresRegular("cartier_contraction"));
        }
        exponent_of(self.ring.p, q)?;
        let q = i64::try_from(q).map_err(|_| Error::Overflow)?;
        // The least b with ⌊b_i/q⌋ >= t_i is q t_i in every coordinate.
        let gens = self
            .staircase
            .generators_i64()
            .iter()
            .map(|t| {
                t.iter()
                    .map(|&x| x.checked_mul(q).ok_or(Error::Overflow))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.with_gens(gens))
    }

    /// Membership in the contraction by the floor rule itself.
    pub fn cartier_contains(&self, q: u64, b: &[i64]) -> Result<bool> {
        if !self.ring.is_regular() {
            return Err(Error::RequiresRegular("cartier_contains"));
        }
        let q = i64::try_from(q).map_err(|_| Error::Overflow)?;
        if b.iter().any(|&x| x < 0) {
            return Ok(false);
        }
        let floor: Vec<i64> = b.iter().map(|&x| x / q).collect();
        Ok(self.staircase.contains_i64(&floor))
    }

    /// Area of the staircase complement, by inclusion-exclusion or slab sweep.
    pub fn e_hk_exact(&self) -> Result<BigRational> {
        if !self.ring.is_regular() {
            return Err(Error::RequiresRegular("e_hk_exact"));
        }
        let index = StaircaseIndex::new(self.ring.dim(), self.staircase.generators_i64());
        Ok(BigRational::from_integer(orthant::complement_volume(&index)?))
    }

    /// `ℓ(R / I^{[p^e]}) / p^{ed}` for `e = 0..=e_max`.
    pub fn e_hk_counting(&self, e_max: u32) -> Result<ConvergenceReport> {
        let sequence = (0..=e_max)
            .map(|e| {
                let q = prime_power(self.ring.p, e)?;
                let len = self.frobenius_power(q)?.colength()?;
                Ok(SequencePoint {
                    e,
                    q,
                    value: BigRational::new(len, num_traits::pow(BigInt::from(q), self.ring.dim())),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvergenceReport::new("e_hk counting", sequence))
    }

    pub fn e_hk(&self, mode: HkMode, e_max: u32) -> Result<HkValue> {
        match mode {
            HkMode::Exact => self.e_hk_exact().map(HkValue::Exact),
            HkMode::Counting => self.e_hk_counting(e_max).map(HkValue::Counting),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HkMode {
    Exact,
    Counting,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HkValue {
    Exact(BigRational),
    Counting(ConvergenceReport),
}

/// `#(S \ T)` for a cofinite ideal `T`.
pub fn colength_of(t: &SemigroupIdeal) -> Result<BigInt> {
    let s = t.parent();
    if s.is_regular() {
        return orthant::colength(&StaircaseIndex::new(s.dim(), t.generators_i64()));
    }
    Ok(BigInt::from(gap_points(t)?.len()))
}

/// The finite set `S \ T` of a cofinite ideal, in breadth-first order from 0.
pub fn gap_points(t: &SemigroupIdeal) -> Result<Vec<Vec<i64>>> {
    let s = t.parent();
    if !t.is_cofinite() {
        return Err(Error::NotMPrimary(
            "some extreme ray of the cone carries no generator".into(),
        ));
    }
    // Every partial sum of a decomposition of a gap lies outside T, so the
    // gaps are reachable from 0 through gaps.
    let zero = vec![0i64; s.dim()];
    if t.contains_i64(&zero) {
        return Ok(Vec::new());
    }
    let mut seen: HashSet<Vec<i64>> = HashSet::from([zero.clone()]);
    let mut order = vec![zero];
    let mut next = 0;
    while next < order.len() {
        let u = order[next].clone();
        next += 1;
        for g in s.generators_i64() {
            let v = u
                .iter()
                .zip(g)
                .map(|(x, y)| x.checked_add(*y).ok_or(Error::Overflow))
                .collect::<Result<Vec<_>>>()?;
            if !seen.contains(&v) && !t.contains_i64(&v) {
                seen.insert(v.clone());
                order.push(v);
                if order.len() > GENERAL_COLENGTH_CAP {
                    return Err(Error::InvalidParameter(format!(
                        "complement exceeds {GENERAL_COLENGTH_CAP} points"
                    )));
                }
            }
        }
    }
    Ok(order)
}

/// `ord(u) = max { n : u ∈ m^n }`, the longest decomposition of `u` into
/// nonzero generators. On `N^d` this is the coordinate sum.
pub fn m_adic_order(s: &StandardSemigroup, u: &[i64]) -> Option<u64> {
    if !s.contains_i64(u) {
        return None;
    }
    if s.is_regular() {
        return Some(u.iter().sum::<i64>() as u64);
    }
    let mut memo: HashMap<Vec<i64>, u64> = HashMap::new();
    order_rec(s, u, &mut memo)
}

fn order_rec(s: &StandardSemigroup, u: &[i64], memo: &mut HashMap<Vec<i64>, u64>) -> Option<u64> {
    if u.iter().all(|&x| x == 0) {
        return Some(0);
    }
    if let Some(&k) = memo.get(u) {
        return Some(k);
    }
    let mut best = None;
    for g in s.generators_i64() {
        let w: Vec<i64> = u.iter().zip(g).map(|(a, b)| a - b).collect();
        if s.contains_i64(&w) {
            if let Some(k) = order_rec(s, &w, memo) {
                best = best.max(Some(k + 1));
            }
        }
    }
    if let Some(k) = best {
        memo.insert(u.to_vec(), k);
    }
    best
}

/// A gap of `T` of largest m-adic order, with that order; `None` when `T = S`.
pub fn max_gap_order(t: &SemigroupIdeal) -> Result<Option<(Vec<i64>, u64)>> {
    let s = t.parent();
    if s.is_regular() {
        let index = StaircaseIndex::new(s.dim(), t.generators_i64());
        return Ok(orthant::max_gap_degree(&index)?.map(|(u, k)| (u, k as u64)));
    }
    let mut gaps = gap_points(t)?;
    // Subtracting a generator lowers the witness value, so this order puts
    // every u - g before u.
    let w = s.witness().clone();
    let key = |u: &Vec<i64>| w.dot(&LatticePoint::from_i64(u)).expect("same dimension");
    gaps.sort_by_cached_key(|u| (key(u), u.clone()));
    let mut ord: HashMap<Vec<i64>, u64> = HashMap::with_capacity(gaps.len());
    let mut best: Option<(Vec<i64>, u64)> = None;
    for u in gaps {
        let mut k = 0;
        for g in s.generators_i64() {
            let v: Vec<i64> = u.iter().zip(g).map(|(a, b)| a - b).collect();
            // u - g is in S exactly when it is a gap, since T is an ideal.
            if let Some(&kv) = ord.get(&v) {
                k = k.max(kv + 1);
            }
        }
        if best.as_ref().is_none_or(|(_, b)| k > *b) {
            best = Some((u.clone(), k));
        }
        ord.insert(u, k);
    }
    Ok(best)
}
