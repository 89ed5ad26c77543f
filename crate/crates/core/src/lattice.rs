//! Integer lattice primitives: points of Z^d, weight orderings, and box
//! enumeration.
//!
//! Coordinates are arbitrary precision. The counting kernels elsewhere in the
//! crate convert to machine integers once, with a checked conversion, because
//! any box they could enumerate fits comfortably in `i64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest ambient dimension handled by the lattice layer.
pub const MAX_LATTICE_DIM: usize = 6;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(Vec<BigInt>);

impl LatticePoint {
    pub fn new(coords: Vec<BigInt>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::UnsupportedDimension {
                found: 0,
                max: MAX_LATTICE_DIM,
            });
        }
        Ok(LatticePoint(coords))
    }

    /// Panics on an empty slice; use [`LatticePoint::new`] for fallible input.
    pub fn from_i64(coords: &[i64]) -> Self {
        assert!(!coords.is_empty(), "lattice points have dimension >= 1");
        LatticePoint(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        LatticePoint(vec![BigInt::zero(); dim.max(1)])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut coords = vec![BigInt::zero(); dim];
        coords[axis] = BigInt::one();
        LatticePoint(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    fn check_dim(&self, other: &LatticePoint) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &LatticePoint) -> Result<LatticePoint> {
        self.check_dim(other)?;
        Ok(LatticePoint(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn checked_sub(&self, other: &LatticePoint) -> Result<LatticePoint> {
        self.check_dim(other)?;
        Ok(LatticePoint(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scale(&self, k: &BigInt) -> LatticePoint {
        LatticePoint(self.0.iter().map(|c| c * k).collect())
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &LatticePoint) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).all(|(a, b)| a <= b))
    }

    pub fn coord_sum(&self) -> BigInt {
        self.0.iter().sum()
    }

    pub fn to_i64(&self) -> Result<Vec<i64>> {
        self.0
            .iter()
            .map(|c| c.to_i64().ok_or(Error::Overflow))
            .collect()
    }

    pub fn to_rational(&self) -> Vec<BigRational> {
        self.0
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect()
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl serde::Serialize for LatticePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for LatticePoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| Error::InvalidParameter(format!("not a tuple: {s:?}")))?;
        let coords = inner
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::InvalidParameter(format!("bad coordinate {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        LatticePoint::new(coords)
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;

    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        self.checked_add(rhs).expect("lattice point dimensions agree")
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;

    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        self.checked_sub(rhs).expect("lattice point dimensions agree")
    }
}

impl Neg for &LatticePoint {
    type Output = LatticePoint;

    fn neg(self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|c| -c).collect())
    }
}

/// The weight vector `a` that embeds Z^d into R through `u -> (a, u)`.
///
/// Components are exact rationals. Whether `a` is positive on a particular
/// cone is a property of the pair and is checked where a cone is involved.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeightVector(Vec<BigRational>);

impl WeightVector {
    pub fn new(weights: Vec<BigRational>) -> Result<Self> {
        if weights.is_empty() || weights.len() > MAX_LATTICE_DIM {
            return Err(Error::UnsupportedDimension {
                found: weights.len(),
                max: MAX_LATTICE_DIM,
            });
        }
        if weights.iter().all(Zero::is_zero) {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }
        Ok(WeightVector(weights))
    }

    pub fn from_i64(weights: &[i64]) -> Result<Self> {
        Self::new(weights.iter().map(|&w| BigRational::from_integer(w.into())).collect())
    }

    pub fn from_integers(weights: &[BigInt]) -> Result<Self> {
        Self::new(
            weights
                .iter()
                .map(|w| BigRational::from_integer(w.clone()))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.0
    }

    /// True when every component is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.0.iter().all(Signed::is_positive)
    }

    pub fn dot(&self, u: &LatticePoint) -> Result<BigRational> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(u.coords())
            .map(|(w, c)| w * c)
            .fold(BigRational::zero(), |acc, x| acc + x))
    }

    pub fn dot_rational(&self, x: &[BigRational]) -> Result<BigRational> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(x)
            .map(|(w, c)| w * c)
            .fold(BigRational::zero(), |acc, x| acc + x))
    }

    /// Writes `a = numerators / denominator` with a common positive denominator.
    pub fn integer_form(&self) -> (Vec<BigInt>, BigInt) {
        let den = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, w| num_integer::lcm(acc, w.denom().clone()));
        let nums = self
            .0
            .iter()
            .map(|w| w.numer() * (&den / w.denom()))
            .collect();
        (nums, den)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Compares `u` and `v` by `(a, u)` versus `(a, v)`; exact ties are broken
/// lexicographically on the coordinates, so `Equal` means `u == v`.
pub fn a_compare(a: &WeightVector, u: &LatticePoint, v: &LatticePoint) -> Result<Ordering> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    let (du, dv) = (a.dot(u)?, a.dot(v)?);
    Ok(du.cmp(&dv).then_with(|| u.coords().cmp(v.coords())))
}

/// Number of lattice points in the half-open box `[lo, hi)`.
pub fn box_count(lo: &LatticePoint, hi: &LatticePoint) -> Result<BigInt> {
    lo.check_dim(hi)?;
    let mut n = BigInt::one();
    for (l, h) in lo.coords().iter().zip(hi.coords()) {
        if h <= l {
            return Ok(BigInt::zero());
        }
        n *= h - l;
    }
    Ok(n)
}

/// Iterator over the half-open box `[lo, hi)`, last coordinate fastest.
pub struct BoxIter {
    lo: Vec<BigInt>,
    hi: Vec<BigInt>,
    next: Option<Vec<BigInt>>,
}

impl Iterator for BoxIter {
    type Item = LatticePoint;

    fn next(&mut self) -> Option<LatticePoint> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut axis = succ.len();
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            succ[axis] += 1;
            if succ[axis] < self.hi[axis] {
                self.next = Some(succ);
                break;
            }
            succ[axis] = self.lo[axis].clone();
        }
        Some(LatticePoint(current))
    }
}

/// Enumerates every `x` with `lo <= x < hi` componentwise in lexicographic
/// order. An empty box yields nothing.
pub fn enumerate_box(lo: &LatticePoint, hi: &LatticePoint) -> Result<BoxIter> {
    lo.check_dim(hi)?;
    let empty = lo.coords().iter().zip(hi.coords()).any(|(l, h)| h <= l);
    Ok(BoxIter {
        lo: lo.coords().to_vec(),
        hi: hi.coords().to_vec(),
        next: (!empty).then(|| lo.coords().to_vec()),
    })
}
